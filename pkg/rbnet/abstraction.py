import itertools
import logging
from collections import deque
from typing import Iterator, Optional

from BTrees.OOBTree import OOBTree as BTree
from pydantic import BaseModel, ConfigDict, model_validator

from rbnet.configuration import Configuration
from rbnet.execution import Communication, Execution, ExecutionBuilder
from rbnet.protocol import BroadcastProtocol, ProtocolIndex, protocol_index

logger = logging.getLogger("rbnet.abstraction")


class AbstractConfiguration(BaseModel):
    """
    Number of nodes in each state, topology forgotten.

    Sound and complete for unconstrained reconfiguration, where any
    neighbourhood can be set up before any broadcast.

    Attributes
    ----------
    counts : tuple[tuple[str, int], ...]
        Sorted ``(state, count)`` pairs with positive counts
    """

    model_config = ConfigDict(frozen=True)

    counts: tuple[tuple[str, int], ...]

    @model_validator(mode="after")
    def _check(self):
        if sum(c for _, c in self.counts) < 1:
            raise ValueError("an abstract configuration has at least one node")
        if any(c <= 0 for _, c in self.counts):
            raise ValueError("counts must be positive")
        return self

    @classmethod
    def of(cls, mapping: dict[str, int]) -> "AbstractConfiguration":
        return cls(counts=tuple(sorted((s, c) for s, c in mapping.items() if c > 0)))

    @classmethod
    def from_configuration(cls, g: Configuration) -> "AbstractConfiguration":
        return cls.of(dict(g.label_counts()))

    def as_dict(self) -> dict[str, int]:
        return dict(self.counts)

    @property
    def total(self) -> int:
        return sum(c for _, c in self.counts)


# a move: broadcaster state, broadcaster target, message, and per receiving
# state the sorted targets picked by its receivers
Move = tuple[str, str, str, tuple[tuple[str, tuple[str, ...]], ...]]


def _distributions(count: int, targets: tuple[str, ...]) -> Iterator[tuple[str, ...]]:
    """Multisets of size 0..count over ``targets``."""
    for size in range(count + 1):
        yield from itertools.combinations_with_replacement(targets, size)


def abstract_moves(index: ProtocolIndex, counts: dict[str, int]) -> Iterator[tuple[Move, dict[str, int]]]:
    for state in sorted(counts):
        for message, target in index.outgoing_broadcasts.get(state, ()):
            rest = dict(counts)
            rest[state] -= 1
            options = []
            for p in sorted(rest):
                receive = index.receive_targets(p, message)
                if rest[p] > 0 and receive:
                    options.append([(p, d) for d in _distributions(rest[p], receive)])
            for picked in itertools.product(*options):
                after = dict(rest)
                after[target] = after.get(target, 0) + 1
                for p, chosen in picked:
                    after[p] -= len(chosen)
                    for q in chosen:
                        after[q] = after.get(q, 0) + 1
                receivers = tuple((p, chosen) for p, chosen in picked if chosen)
                yield (state, target, message, receivers), {s: c for s, c in after.items() if c > 0}


def abstract_step(proto: BroadcastProtocol, a: AbstractConfiguration) -> set[AbstractConfiguration]:
    """
    Every abstract configuration reachable by one communication step: one
    broadcaster, any sub-multiset of the other nodes as receivers.
    """
    index = protocol_index(proto)
    return {AbstractConfiguration.of(after) for _, after in abstract_moves(index, a.as_dict())}


def _key(counts: dict[str, int]) -> tuple:
    return tuple(sorted(counts.items()))


def initial_multisets(proto: BroadcastProtocol, n: int) -> Iterator[dict[str, int]]:
    initial = sorted(proto.initial_states)
    for combo in itertools.combinations_with_replacement(initial, n):
        counts: dict[str, int] = {}
        for s in combo:
            counts[s] = counts.get(s, 0) + 1
        yield counts


def abstract_reach(proto: BroadcastProtocol, n: int) -> set[tuple]:
    """Every label multiset reachable from an initial one with ``n`` nodes."""
    index = protocol_index(proto)
    seen = set()
    todo = deque()
    for counts in initial_multisets(proto, n):
        key = _key(counts)
        if key not in seen:
            seen.add(key)
            todo.append(counts)
    while todo:
        counts = todo.popleft()
        for _, after in abstract_moves(index, counts):
            key = _key(after)
            if key not in seen:
                seen.add(key)
                todo.append(after)
    return seen


class AbstractWitness(BaseModel):
    start: dict[str, int]
    moves: list[Move]


def abstract_search(
    proto: BroadcastProtocol, n: int, max_states: int, max_depth: int
) -> tuple[str, Optional[AbstractWitness], dict]:
    """
    Breadth-first search for a label multiset inside the target set.

    Explored multisets are kept in an ordered tree so parents can be looked
    up in a stable order.

    :return: verdict (``found``, ``exhausted`` or ``budget_exceeded``), the
        witness if any, and counters ``states``, ``peak``, ``depth``
    """
    index = protocol_index(proto)
    targets = proto.targets
    dead = index.dead_states
    parents = BTree()
    frontier = []
    for counts in initial_multisets(proto, n):
        if any(s in dead for s in counts):
            continue
        key = _key(counts)
        if key not in parents:
            parents[key] = None
            frontier.append(counts)
    stats = {"states": len(parents), "peak": len(frontier), "depth": 0}
    depth = 0

    def witness(key) -> AbstractWitness:
        moves = []
        while parents[key] is not None:
            prev, move = parents[key]
            moves.append(move)
            key = prev
        return AbstractWitness(start=dict(key), moves=list(reversed(moves)))

    while frontier:
        for counts in frontier:
            if all(s in targets for s in counts):
                return "found", witness(_key(counts)), stats
        if depth >= max_depth:
            return "budget_exceeded", None, stats
        following = []
        for counts in frontier:
            key = _key(counts)
            for move, after in abstract_moves(index, counts):
                if any(s in dead for s in after):
                    continue
                nkey = _key(after)
                if nkey in parents:
                    continue
                parents[nkey] = (key, move)
                following.append(after)
                if len(parents) > max_states:
                    stats["states"] = len(parents)
                    return "budget_exceeded", None, stats
        depth += 1
        frontier = following
        stats.update(states=len(parents), peak=max(stats["peak"], len(frontier)), depth=depth)
        logger.debug("abstract level %d: %d new multisets", depth, len(frontier))
    return "exhausted", None, stats


def concretize(proto: BroadcastProtocol, w: AbstractWitness) -> Execution:
    """
    Turns an abstract witness into a concrete execution: before every
    broadcast, a reconfiguration makes the broadcaster's neighbourhood exactly
    its receivers.
    """
    labels = []
    for state in sorted(w.start):
        labels.extend([state] * w.start[state])
    initial = Configuration.of(labels)
    builder = ExecutionBuilder(proto, initial)
    current = list(labels)
    for state, target, message, receivers in w.moves:
        b = current.index(state)
        used = {b}
        outcome = {b: target}
        for p, chosen in receivers:
            for q in chosen:
                v = next(i for i, s in enumerate(current) if s == p and i not in used)
                used.add(v)
                outcome[v] = q
        star = frozenset(tuple(sorted((b, v))) for v in outcome if v != b)
        builder.set_edges(star)
        builder.communicate(
            Communication(broadcaster=b, message=message, outcome=tuple(sorted(outcome.items())))
        )
        for v, q in outcome.items():
            current[v] = q
    return builder.seal(keep_last_reconfiguration=False)
