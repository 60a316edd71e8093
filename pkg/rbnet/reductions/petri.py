import itertools
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from rbnet.consts import PCHECK, PEND, PSIMUL, PSTART
from rbnet.protocol import BroadcastProtocol, protocol_index


class NetTransition(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    pre: dict[str, int] = Field(default_factory=dict)
    post: dict[str, int] = Field(default_factory=dict)


class PetriNet(BaseModel):
    """
    Place/transition net with an initial and a final marking.

    Markings list only the marked places; every other place holds zero
    tokens.
    """

    places: tuple[str, ...]
    transitions: tuple[NetTransition, ...]
    initial: dict[str, int] = Field(default_factory=dict)
    final: dict[str, int] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self):
        known = set(self.places)
        if len(known) != len(self.places):
            raise ValueError("duplicate place")
        names = [t.name for t in self.transitions]
        if len(set(names)) != len(names):
            raise ValueError("duplicate transition name")
        for t in self.transitions:
            for place, weight in itertools.chain(t.pre.items(), t.post.items()):
                if place not in known:
                    raise ValueError(f"transition {t.name} uses unknown place {place!r}")
                if weight < 1:
                    raise ValueError(f"transition {t.name} has weight {weight} on {place}")
        for marking in (self.initial, self.final):
            for place, tokens in marking.items():
                if place not in known or tokens < 0:
                    raise ValueError(f"bad marking entry {place}={tokens}")
        return self

    def transition(self, name: str) -> NetTransition:
        for t in self.transitions:
            if t.name == name:
                return t
        raise KeyError(name)


def preconf(m: int) -> str:
    return f"preconf_{m}"


def control_places(k: int) -> list[str]:
    return [PSTART, PSIMUL, PCHECK, PEND] + [preconf(m) for m in range(1, k + 1)]


def single_place(i: int) -> str:
    return f"p_{i}"


def pair_place(i: int, j: int) -> str:
    i, j = min(i, j), max(i, j)
    return f"p_{i}_{j}"


class _Net:
    def __init__(self):
        self.transitions: list[NetTransition] = []
        self.seen: set = set()

    def add(self, name: str, pre: list[str], post: list[str]):
        pre_m: dict[str, int] = {}
        post_m: dict[str, int] = {}
        for p in pre:
            pre_m[p] = pre_m.get(p, 0) + 1
        for p in post:
            post_m[p] = post_m.get(p, 0) + 1
        key = (tuple(sorted(pre_m.items())), tuple(sorted(post_m.items())))
        if key in self.seen:
            return
        self.seen.add(key)
        self.transitions.append(NetTransition(name=name, pre=pre_m, post=post_m))


def compile_to_petri(proto: BroadcastProtocol, k: int) -> PetriNet:
    """
    Net whose reachability of the final marking is equivalent to
    synchronization under ``k``-constrained reconfiguration when every node
    has at most one neighbour.

    A token in ``p_i`` is an isolated node in the ``i``-th state, a token in
    ``p_i_j`` (``i <= j``) a pair of linked nodes. The run goes through three
    phases marked by control places: seeding from ``pstart``, simulation
    from ``psimul`` where every communication hands over to ``preconf_1``
    and each of up to ``k`` link changes moves one ``preconf`` level up, and
    checking from ``pcheck`` which absorbs tokens in target states before
    handing over to ``pend``. Leaving ``pstart`` seeds one last node, so the
    simulated network is never empty.

    :param proto: Protocol with a target set
    :type proto: BroadcastProtocol
    :param k: Link changes allowed per reconfiguration step
    :type k: int
    :return: Net with ``n + n(n+1)/2 + k + 4`` places for ``n`` states
    :rtype: PetriNet
    """
    if k < 1:
        raise ValueError("k must be positive")
    n = len(proto.states)
    index = {s: i for i, s in enumerate(proto.states)}
    places = [single_place(i) for i in range(n)]
    places += [pair_place(i, j) for i in range(n) for j in range(i, n)]
    places += control_places(k)
    net = _Net()

    initial = sorted(index[s] for s in proto.initial_states)
    for i in initial:
        net.add(f"init_{i}", [PSTART], [PSTART, single_place(i)])
        net.add(f"seed_{i}", [PSTART], [PSIMUL, single_place(i)])
    for i, j in itertools.combinations_with_replacement(initial, 2):
        net.add(f"init_{i}_{j}", [PSTART], [PSTART, pair_place(i, j)])
        net.add(f"seed_{i}_{j}", [PSTART], [PSIMUL, pair_place(i, j)])

    idx = protocol_index(proto)
    after_comm = preconf(1)
    for t in proto.transitions:
        if t.action != "!":
            continue
        i, j = index[t.source], index[t.target]
        net.add(f"bcast_{i}_{t.message}_{j}", [PSIMUL, single_place(i)], [after_comm, single_place(j)])
        for other in proto.states:
            r = index[other]
            for dest in idx.receive_targets(other, t.message):
                d = index[dest]
                net.add(
                    f"pair_{i}_{r}_{t.message}_{j}_{d}",
                    [PSIMUL, pair_place(i, r)],
                    [after_comm, pair_place(j, d)],
                )

    for m in range(1, k + 1):
        here, up = preconf(m), (preconf(m + 1) if m < k else PSIMUL)
        net.add(f"end_{m}", [here], [PSIMUL])
        for i, j in itertools.combinations_with_replacement(range(n), 2):
            net.add(
                f"create_{m}_{i}_{j}",
                [here, single_place(i), single_place(j)],
                [up, pair_place(i, j)],
            )
            net.add(
                f"break_{m}_{i}_{j}",
                [here, pair_place(i, j)],
                [up, single_place(i), single_place(j)],
            )

    net.add("check", [PSIMUL], [PCHECK])
    targets = sorted(index[s] for s in proto.targets)
    for i in targets:
        net.add(f"absorb_{i}", [PCHECK, single_place(i)], [PCHECK])
    for i, j in itertools.combinations_with_replacement(targets, 2):
        net.add(f"absorb_{i}_{j}", [PCHECK, pair_place(i, j)], [PCHECK])
    net.add("finish", [PCHECK], [PEND])

    return PetriNet(
        places=tuple(places),
        transitions=tuple(net.transitions),
        initial={PSTART: 1},
        final={PEND: 1},
    )


def dead_places(proto: BroadcastProtocol, net: Optional[PetriNet] = None) -> frozenset[str]:
    """Node places holding a state from which the target set is unreachable."""
    dead = {i for i, s in enumerate(proto.states) if s in protocol_index(proto).dead_states}
    n = len(proto.states)
    out = {single_place(i) for i in dead}
    out |= {pair_place(i, j) for i in range(n) for j in range(i, n) if i in dead or j in dead}
    if net is not None:
        out &= set(net.places)
    return frozenset(out)
