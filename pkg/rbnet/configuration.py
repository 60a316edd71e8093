from collections import Counter
from typing import Iterable

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from rbnet.errors import LabelMismatch, NodeSetMismatch

Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def norm_edges(edges: Iterable[Iterable[int]]) -> frozenset[Edge]:
    return frozenset(norm_edge(*e) for e in edges)


class Configuration(BaseModel):
    """
    Undirected graph whose nodes carry protocol states.

    Nodes are the dense indices ``0 .. len(labels) - 1``; edges are stored
    as ordered pairs ``(u, v)`` with ``u < v``.

    Attributes
    ----------
    labels : tuple[str, ...]
        State of every node
    edges : frozenset[tuple[int, int]]
        Current communication links
    """

    model_config = ConfigDict(frozen=True)

    labels: tuple[str, ...]
    edges: frozenset[Edge] = frozenset()

    @field_validator("edges", mode="before")
    @classmethod
    def _normalize(cls, value):
        return norm_edges(value)

    @model_validator(mode="after")
    def _check(self):
        n = len(self.labels)
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if u < 0 or v >= n:
                raise ValueError(f"edge {(u, v)} leaves the node set 0..{n - 1}")
        return self

    @classmethod
    def of(cls, labels: Iterable[str], edges: Iterable[Iterable[int]] = ()) -> "Configuration":
        return cls(labels=tuple(labels), edges=norm_edges(edges))

    @classmethod
    def trusted(cls, labels: tuple[str, ...], edges: frozenset[Edge]) -> "Configuration":
        """Builds a configuration from already normalized parts, skipping validation."""
        return cls.model_construct(labels=labels, edges=edges)

    @property
    def nodes(self) -> range:
        return range(len(self.labels))

    @property
    def size(self) -> int:
        return len(self.labels)

    def neighbours(self, node: int) -> list[int]:
        result = []
        for u, v in self.edges:
            if u == node:
                result.append(v)
            elif v == node:
                result.append(u)
        return sorted(result)

    def degree(self, node: int) -> int:
        return sum(1 for e in self.edges if node in e)

    def label_counts(self) -> Counter:
        return Counter(self.labels)

    def with_edges(self, edges: frozenset[Edge]) -> "Configuration":
        return Configuration.trusted(self.labels, edges)

    def with_labels(self, labels: tuple[str, ...]) -> "Configuration":
        return Configuration.trusted(labels, self.edges)


def _matched(g: Configuration, g2: Configuration):
    if g.size != g2.size:
        raise NodeSetMismatch(f"{g.size} nodes against {g2.size}")
    if g.labels != g2.labels:
        bad = next(i for i, (a, b) in enumerate(zip(g.labels, g2.labels)) if a != b)
        raise LabelMismatch(f"node {bad} is {g.labels[bad]!r} against {g2.labels[bad]!r}")


def distance(g: Configuration, g2: Configuration) -> int:
    """
    Number of links in the symmetric difference of the two edge sets, or 0
    when the graphs disagree on nodes or labels.
    """
    if g.size != g2.size or g.labels != g2.labels:
        return 0
    return len(g.edges ^ g2.edges)


def strict_distance(g: Configuration, g2: Configuration) -> int:
    """
    Same as :func:`distance` but refuses to compare unrelated graphs.

    :raises NodeSetMismatch: when node counts differ
    :raises LabelMismatch: when some node is labelled differently
    """
    _matched(g, g2)
    return len(g.edges ^ g2.edges)


def node_distance(node: int, g: Configuration, g2: Configuration) -> int:
    """
    Number of changed links incident to ``node``.

    :raises NodeSetMismatch: when node counts differ
    :raises LabelMismatch: when some node is labelled differently
    """
    _matched(g, g2)
    return sum(1 for e in g.edges ^ g2.edges if node in e)


def juxtapose(g: Configuration, g2: Configuration) -> Configuration:
    """Disjoint union; the nodes of ``g2`` are shifted past those of ``g``."""
    offset = g.size
    shifted = frozenset((u + offset, v + offset) for u, v in g2.edges)
    return Configuration.trusted(g.labels + g2.labels, g.edges | shifted)


def power(g: Configuration, copies: int) -> Configuration:
    """``copies`` disjoint copies of ``g``; copy ``j`` owns nodes ``j*|g| ..``."""
    result = Configuration.trusted((), frozenset())
    for _ in range(copies):
        result = juxtapose(result, g)
    return result


def restrict(g: Configuration, nodes: Iterable[int]) -> Configuration:
    """Induced sub-configuration on ``nodes``, renumbered in increasing order."""
    keep = sorted(set(nodes))
    rename = {old: new for new, old in enumerate(keep)}
    edges = frozenset(
        norm_edge(rename[u], rename[v]) for u, v in g.edges if u in rename and v in rename
    )
    return Configuration.trusted(tuple(g.labels[i] for i in keep), edges)


def to_dot(g: Configuration, name: str = "G", indent: str = "  ") -> str:
    lines = [f"graph {name} {{"]
    lines.extend(_dot_body(g, "", indent))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_body(g: Configuration, prefix: str, indent: str) -> list[str]:
    lines = [f'{indent}{prefix}{i} [label="{i}: {label}"];' for i, label in enumerate(g.labels)]
    lines.extend(f"{indent}{prefix}{u} -- {prefix}{v};" for u, v in sorted(g.edges))
    return lines
