import itertools
import math
from typing import Hashable

from rbnet.configuration import Edge
from rbnet.consts import CANONICAL_CLASS_LIMIT, CANONICAL_PERMUTATION_LIMIT
from rbnet.topology import adjacency


def _refine(labels: tuple[str, ...], adj: list[list[int]]) -> list[int]:
    signature = [(label, len(adj[i]), tuple(sorted(labels[j] for j in adj[i]))) for i, label in enumerate(labels)]
    colors = _compress(signature)
    for _ in range(2):
        signature = [(colors[i], tuple(sorted(colors[j] for j in adj[i]))) for i in range(len(labels))]
        colors = _compress(signature)
    return colors


def _compress(signature: list) -> list[int]:
    palette = {sig: c for c, sig in enumerate(sorted(set(signature)))}
    return [palette[sig] for sig in signature]


def _encode(labels: tuple[str, ...], edges: frozenset[Edge], order: list[int]) -> tuple:
    position = {node: i for i, node in enumerate(order)}
    relabelled = tuple(sorted(tuple(sorted((position[u], position[v]))) for u, v in edges))
    return (tuple(labels[node] for node in order), relabelled)


def canonical_key(labels: tuple[str, ...], edges: frozenset[Edge]) -> Hashable:
    """
    Key equal for two labelled graphs only if they are isomorphic, and equal
    for isomorphic graphs whenever every refinement class is small.

    Nodes are ordered by colour refinement on (label, degree, neighbour
    labels); ties inside a class are broken by trying every permutation of
    the class and keeping the smallest encoding. Past
    ``CANONICAL_CLASS_LIMIT`` nodes per class the refinement order is used
    as is, which keeps keys sound but misses some isomorphisms.
    """
    n = len(labels)
    if n == 0:
        return ((), ())
    adj = adjacency(n, edges)
    colors = _refine(labels, adj)
    classes: dict[int, list[int]] = {}
    for node in range(n):
        classes.setdefault(colors[node], []).append(node)
    groups = [classes[c] for c in sorted(classes)]
    if all(len(g) == 1 for g in groups):
        return _encode(labels, edges, [g[0] for g in groups])
    total = math.prod(math.factorial(len(g)) for g in groups)
    if max(len(g) for g in groups) > CANONICAL_CLASS_LIMIT or total > CANONICAL_PERMUTATION_LIMIT:
        return _encode(labels, edges, [node for g in groups for node in g])
    best = None
    for choice in itertools.product(*(itertools.permutations(g) for g in groups)):
        order = [node for part in choice for node in part]
        key = _encode(labels, edges, order)
        if best is None or key < best:
            best = key
    return best
