import itertools
from typing import Iterator

from rbnet.configuration import Configuration, Edge
from rbnet.consts import UNCONSTRAINED_ENUMERATION_LIMIT
from rbnet.errors import BudgetUnbounded
from rbnet.execution import Communication, Reconfiguration
from rbnet.policy import (
    ConstraintPolicy,
    KBalanced,
    KLocallyConstrained,
    StronglyKConstrained,
    Unconstrained,
)
from rbnet.protocol import BroadcastProtocol, ProtocolIndex, protocol_index
from rbnet.topology import adjacency, within_bounds


def communication_moves(
    index: ProtocolIndex, labels: tuple[str, ...], adj: list[list[int]]
) -> Iterator[tuple[int, str, tuple, tuple[str, ...]]]:
    """
    Every enabled communication as ``(broadcaster, message, outcome, labels)``,
    ordered by broadcaster, message, then transition choices.
    """
    for b, state in enumerate(labels):
        neighbours = sorted(adj[b])
        for message, target in index.outgoing_broadcasts.get(state, ()):
            choices = []
            for v in neighbours:
                options = index.receive_targets(labels[v], message)
                if not options:
                    break
                choices.append(options)
            else:
                involved = sorted([b] + neighbours)
                for picked in itertools.product(*choices):
                    after = list(labels)
                    after[b] = target
                    for v, new in zip(neighbours, picked):
                        after[v] = new
                    outcome = tuple((v, after[v]) for v in involved)
                    yield b, message, outcome, tuple(after)


def enabled_communications(proto: BroadcastProtocol, g: Configuration) -> list[Communication]:
    """
    All communication steps enabled in ``g``, one per choice of transitions.

    A broadcaster without neighbours is always enabled.
    """
    index = protocol_index(proto)
    adj = adjacency(g.size, g.edges)
    return [
        Communication(broadcaster=b, message=m, outcome=outcome)
        for b, m, outcome, _ in communication_moves(index, g.labels, adj)
    ]


def _local_toggles(pairs: list[Edge], n: int, k: int) -> Iterator[tuple[Edge, ...]]:
    """Subsets of ``pairs`` touching each node at most ``k`` times, by size then order."""
    for size in range(len(pairs) + 1):
        found = False
        for subset in itertools.combinations(pairs, size):
            load = [0] * n
            ok = True
            for u, v in subset:
                load[u] += 1
                load[v] += 1
                if load[u] > k or load[v] > k:
                    ok = False
                    break
            if ok:
                found = True
                yield subset
        if not found:
            return


def toggle_sets(n: int, policy: ConstraintPolicy) -> Iterator[frozenset[Edge]]:
    """
    Link sets one reconfiguration step may flip under the policy's regime,
    trivial set first, then by size and lexicographic order.

    :raises BudgetUnbounded: when the regime does not bound a step and the
        network is too large to enumerate every topology
    """
    pairs = list(itertools.combinations(range(n), 2))
    regime = policy.regime
    if isinstance(regime, KLocallyConstrained):
        for subset in _local_toggles(pairs, n, regime.k):
            yield frozenset(subset)
        return
    if isinstance(regime, (Unconstrained, KBalanced)):
        if n > UNCONSTRAINED_ENUMERATION_LIMIT:
            raise BudgetUnbounded(
                f"{regime} reconfigurations over {n} nodes cannot be enumerated "
                f"(limit {UNCONSTRAINED_ENUMERATION_LIMIT})"
            )
        sizes = range(len(pairs) + 1)
    elif isinstance(regime, StronglyKConstrained):
        sizes = [regime.k] if regime.k <= len(pairs) else []
    else:
        budget = min(policy.step_budget(n), len(pairs))
        sizes = range(budget + 1)
    for size in sizes:
        for subset in itertools.combinations(pairs, size):
            yield frozenset(subset)


def reconfiguration_moves(
    n: int, edges: frozenset[Edge], policy: ConstraintPolicy
) -> Iterator[tuple[frozenset[Edge], frozenset[Edge]]]:
    """``(toggles, new_edges)`` for each allowed step whose result meets the topology bounds."""
    for toggles in toggle_sets(n, policy):
        after = edges ^ toggles
        if policy.has_topology and not within_bounds(n, after, policy.degree_bound, policy.path_bound):
            continue
        yield toggles, after


def successor_reconfigurations(g: Configuration, policy: ConstraintPolicy) -> Iterator[Reconfiguration]:
    """
    Lazily enumerates the reconfiguration steps allowed from ``g``.

    The stream is exhaustive within the regime's budget, has no duplicates,
    and starts with the trivial step whenever ``g`` itself meets the bounds.

    :raises BudgetUnbounded: for unconstrained or balanced regimes on more
        than ``UNCONSTRAINED_ENUMERATION_LIMIT`` nodes
    """
    for toggles, _ in reconfiguration_moves(g.size, g.edges, policy):
        yield Reconfiguration.toggle(g.edges, toggles)
