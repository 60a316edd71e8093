import logging
from collections import defaultdict
from typing import Iterable

from pydantic import BaseModel

from rbnet.protocol import BROADCAST, BroadcastProtocol

logger = logging.getLogger("rbnet.saturation")

Arc = tuple[str, str, str, str]


class _Tables:
    def __init__(self, arcs: Iterable[Arc]):
        self.broadcast_from = defaultdict(list)
        self.receive_from = defaultdict(list)
        self.receive_on = defaultdict(list)
        for source, action, message, target in arcs:
            if action == BROADCAST:
                self.broadcast_from[source].append((message, target))
            else:
                self.receive_from[source].append((message, target))
                self.receive_on[message].append((source, target))


def _forward_arcs(proto: BroadcastProtocol) -> list[Arc]:
    return [(t.source, t.action, t.message, t.target) for t in proto.transitions]


def _backward_arcs(proto: BroadcastProtocol) -> list[Arc]:
    return [(t.target, t.action, t.message, t.source) for t in proto.transitions]


def _saturate(tables: _Tables, seed: Iterable[str], restrict: frozenset[str]) -> frozenset[str]:
    reached: set[str] = set()
    enabled: set[str] = set()
    todo: list[str] = []

    def add(state: str):
        if state in restrict and state not in reached:
            reached.add(state)
            todo.append(state)

    for state in seed:
        add(state)
    while todo:
        state = todo.pop()
        for message, target in tables.broadcast_from[state]:
            if target not in restrict:
                continue
            add(target)
            if message not in enabled:
                enabled.add(message)
                for source, dest in tables.receive_on[message]:
                    if source in reached:
                        add(dest)
        for message, target in tables.receive_from[state]:
            if message in enabled:
                add(target)
    return frozenset(reached)


def forward_saturation(
    proto: BroadcastProtocol, seed: Iterable[str], restrict: Iterable[str]
) -> frozenset[str]:
    """
    States coverable from ``seed`` when any number of copies and any
    topology are available, never leaving ``restrict``.

    A broadcast ``q !m q'`` fires from a reached ``q`` into ``q'``; a
    reception ``p ?m p'`` fires from a reached ``p`` once some reached state
    broadcasts ``m`` into ``restrict``.
    """
    return _saturate(_Tables(_forward_arcs(proto)), seed, frozenset(restrict))


def backward_saturation(
    proto: BroadcastProtocol, seed: Iterable[str], restrict: Iterable[str]
) -> frozenset[str]:
    """:func:`forward_saturation` on the protocol with every transition reversed."""
    return _saturate(_Tables(_backward_arcs(proto)), seed, frozenset(restrict))


class IterationRecord(BaseModel):
    forward: list[str]
    backward: list[str]


class SaturationCertificate(BaseModel):
    """
    Trace of the fixpoint computation.

    Attributes
    ----------
    final_set : list[str]
        Fixpoint ``S``; every state in it is reachable from the initial
        states of ``S`` and co-reachable from its target states, inside ``S``
    iterations : int
        Number of refinement rounds, the confirming one included
    history : list[IterationRecord]
        Forward and backward sets of each round
    initial_hit : bool
        ``S`` contains an initial state
    """

    final_set: list[str]
    iterations: int
    history: list[IterationRecord]
    initial_hit: bool


class SaturationVerdict(BaseModel):
    holds: bool
    certificate: SaturationCertificate


def _ordered(proto: BroadcastProtocol, states: Iterable[str]) -> list[str]:
    present = set(states)
    return [s for s in proto.states if s in present]


def decide_synchronization_unconstrained(proto: BroadcastProtocol) -> SaturationVerdict:
    """
    Decides whether some number of nodes can synchronize into the target set
    under arbitrary reconfiguration.

    Shrinks ``S`` (initially every state) to the states both forward
    reachable from ``I ∩ S`` and backward reachable from ``F ∩ S`` within
    ``S``, until it stabilizes; the answer is yes iff ``S`` is not empty.
    """
    forward_tables = _Tables(_forward_arcs(proto))
    backward_tables = _Tables(_backward_arcs(proto))
    initial, targets = proto.initial_states, proto.targets
    current = frozenset(proto.states)
    history = []
    while True:
        forward = _saturate(forward_tables, initial & current, current)
        backward = _saturate(backward_tables, targets & current, current)
        history.append(IterationRecord(forward=_ordered(proto, forward), backward=_ordered(proto, backward)))
        refined = forward & backward
        logger.debug("saturation round %d: %d states left", len(history), len(refined))
        if refined == current:
            break
        current = refined
    certificate = SaturationCertificate(
        final_set=_ordered(proto, current),
        iterations=len(history),
        history=history,
        initial_hit=bool(initial & current),
    )
    return SaturationVerdict(holds=bool(current), certificate=certificate)


def decide_coverability_unconstrained(proto: BroadcastProtocol, state: str) -> bool:
    """
    Whether some node can reach ``state``. Constrained reconfiguration covers
    exactly the same states, so the answer holds for every regime.
    """
    return state in forward_saturation(proto, proto.initial_states, proto.states)


class Viability:
    """
    Per label set, the states that may still lead into the target set given
    which other states are around. Used to cut hopeless configurations out
    of the explicit searches.
    """

    def __init__(self, proto: BroadcastProtocol):
        self.targets = proto.targets
        self.all_states = frozenset(proto.states)
        self.forward_tables = _Tables(_forward_arcs(proto))
        self.backward_tables = _Tables(_backward_arcs(proto))
        self._cache: dict[frozenset[str], bool] = {}

    def viable(self, labels: Iterable[str]) -> bool:
        present = frozenset(labels)
        verdict = self._cache.get(present)
        if verdict is None:
            forward = _saturate(self.forward_tables, present, self.all_states)
            backward = _saturate(self.backward_tables, self.targets & forward, forward)
            verdict = present <= backward
            self._cache[present] = verdict
        return verdict
