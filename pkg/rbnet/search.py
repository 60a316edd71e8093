import itertools
import logging
from typing import Literal, Optional

from pydantic import BaseModel, Field

from rbnet.abstraction import abstract_search, concretize
from rbnet.canonical import canonical_key
from rbnet.configuration import Configuration
from rbnet.consts import (
    DEFAULT_BUDGET_DEPTH,
    DEFAULT_BUDGET_STATES,
    UNCONSTRAINED_ENUMERATION_LIMIT,
)
from rbnet.engine import communication_moves, reconfiguration_moves
from rbnet.errors import ProtocolError
from rbnet.execution import Communication, Execution, Reconfiguration
from rbnet.explore import expand_level
from rbnet.policy import ConstraintPolicy, KBalanced, Unconstrained
from rbnet.protocol import BroadcastProtocol, protocol_index
from rbnet.saturation import Viability
from rbnet.topology import adjacency, within_bounds

logger = logging.getLogger("rbnet.search")

Verdict = Literal["found", "exhausted", "budget_exceeded"]
COMM, RECONF = "C", "R"


class SearchBudget(BaseModel):
    max_states: int = Field(default_factory=lambda: DEFAULT_BUDGET_STATES, ge=1)
    max_depth: int = Field(default_factory=lambda: DEFAULT_BUDGET_DEPTH, ge=0)


class SearchStats(BaseModel):
    states: int = 0
    peak: int = 0
    depth: int = 0


class SearchResult(BaseModel):
    """
    Outcome of a bounded search for a given node count.

    Attributes
    ----------
    verdict : str
        ``found``, ``exhausted`` (no synchronizing execution exists for this
        node count and policy) or ``budget_exceeded``
    witness : Optional[Execution]
        Shortest synchronizing execution when ``verdict == "found"``
    method : str
        ``explicit`` graph search or ``abstract`` counter search
    """

    verdict: Verdict
    witness: Optional[Execution] = None
    stats: SearchStats
    nodes: int
    policy: str
    method: Literal["explicit", "abstract"] = "explicit"

    @property
    def found(self) -> bool:
        return self.verdict == "found"

    def summary(self) -> dict:
        return {"verdict": self.verdict, **self.stats.model_dump()}


class _Record:
    __slots__ = ("labels", "edges", "kind", "parent", "step", "balance", "depth")

    def __init__(self, labels, edges, kind, parent, step, balance, depth):
        self.labels = labels
        self.edges = edges
        self.kind = kind
        self.parent = parent
        self.step = step
        self.balance = balance
        self.depth = depth


class _Search:
    def __init__(
        self,
        proto: BroadcastProtocol,
        n: int,
        policy: ConstraintPolicy,
        budget: SearchBudget,
        threads: int,
    ):
        self.proto = proto
        self.n = n
        self.policy = policy
        self.budget = budget
        self.threads = threads
        self.index = protocol_index(proto)
        self.viability = Viability(proto)
        self.balanced = isinstance(policy.regime, KBalanced)
        self.k = policy.regime.k if self.balanced else 0
        self.pair_count = n * (n - 1) // 2
        self.best: dict = {}

    def hopeless(self, labels: tuple[str, ...]) -> bool:
        if self.proto.is_target(labels):
            return False
        if not any(self.index.can_broadcast(s) for s in labels):
            return True
        return not self.viability.viable(labels)

    def is_goal(self, record: _Record) -> bool:
        if not self.proto.is_target(record.labels):
            return False
        if not self.balanced or record.depth == 0:
            return True
        return record.kind == RECONF and record.balance >= self.k

    def balance_window(self, balance: int, depth: int, kind: str) -> Optional[int]:
        """Clamped balance, or ``None`` when the target balance is out of reach."""
        remaining = self.budget.max_depth - depth
        comms_left = (remaining + 1) // 2 if kind == COMM else remaining // 2
        if balance + self.k * comms_left < self.k:
            return None
        ceiling = self.k + self.pair_count * ((remaining + 1) // 2)
        return min(balance, ceiling)

    def admit(self, labels, edges, kind, parent, step, balance, depth) -> Optional[_Record]:
        if self.balanced:
            balance = self.balance_window(balance, depth, kind)
            if balance is None:
                return None
        key = (kind, canonical_key(labels, edges))
        known = self.best.get(key)
        if known is not None and (not self.balanced or known >= balance):
            return None
        self.best[key] = balance
        record = _Record(labels, edges, kind, parent, step, balance, depth)
        return record

    def seeds(self, initial_edges: str, initial_labels: Optional[tuple[str, ...]]):
        pairs = list(itertools.combinations(range(self.n), 2))
        if initial_edges == "empty":
            graphs = [frozenset()]
        else:
            graphs = (
                frozenset(subset)
                for size in range(len(pairs) + 1)
                for subset in itertools.combinations(pairs, size)
            )
        graphs = [
            g
            for g in graphs
            if not self.policy.has_topology
            or within_bounds(self.n, g, self.policy.degree_bound, self.policy.path_bound)
        ]
        if initial_labels is not None:
            assignments = [tuple(initial_labels)]
        else:
            assignments = list(
                itertools.combinations_with_replacement(sorted(self.proto.initial_states), self.n)
            )
        kinds = [COMM] if self.balanced else [COMM, RECONF]
        for labels in assignments:
            if self.hopeless(labels):
                continue
            for edges in graphs:
                for kind in kinds:
                    record = self.admit(labels, edges, kind, None, None, 0, 0)
                    if record is not None:
                        yield record

    def expand(self, record: _Record) -> list:
        depth = record.depth + 1
        out = []
        if record.kind == COMM:
            adj = adjacency(self.n, record.edges)
            for b, message, outcome, after in communication_moves(self.index, record.labels, adj):
                if self.hopeless(after):
                    continue
                step = (b, message, outcome)
                out.append((after, record.edges, RECONF, step, record.balance + self.k, depth))
        else:
            for toggles, after in reconfiguration_moves(self.n, record.edges, self.policy):
                out.append(
                    (record.labels, after, COMM, toggles, record.balance - len(toggles), depth)
                )
        return out

    def witness(self, record: _Record) -> Execution:
        chain = []
        while record.parent is not None:
            chain.append(record)
            record = record.parent
        root = record
        steps = []
        edges = root.edges
        for r in reversed(chain):
            if r.kind == RECONF:
                b, message, outcome = r.step
                steps.append(Communication(broadcaster=b, message=message, outcome=outcome))
            else:
                steps.append(Reconfiguration.toggle(edges, r.step))
                edges = r.edges
        initial = Configuration.trusted(root.labels, root.edges)
        return Execution(protocol=self.proto, initial=initial, steps=tuple(steps))

    def run(self, initial_edges: str, initial_labels: Optional[tuple[str, ...]]) -> SearchResult:
        stats = SearchStats()

        def result(verdict: Verdict, witness=None) -> SearchResult:
            stats.states = len(self.best)
            return SearchResult(
                verdict=verdict, witness=witness, stats=stats, nodes=self.n, policy=str(self.policy)
            )

        frontier = list(self.seeds(initial_edges, initial_labels))
        stats.peak = len(frontier)
        for record in frontier:
            if self.is_goal(record):
                return result("found", self.witness(record))
        if len(self.best) > self.budget.max_states:
            return result("budget_exceeded")
        depth = 0
        while frontier:
            if depth >= self.budget.max_depth:
                return result("budget_exceeded")
            expanded = expand_level(frontier, self.expand, self.threads)
            following = []
            for parent, successors in zip(frontier, expanded):
                if self.balanced and self.best.get(self._key(parent)) != parent.balance:
                    # superseded by a better balance found later on this level
                    continue
                for labels, edges, kind, step, balance, d in successors:
                    record = self.admit(labels, edges, kind, parent, step, balance, d)
                    if record is None:
                        continue
                    if self.is_goal(record):
                        stats.depth = depth + 1
                        return result("found", self.witness(record))
                    following.append(record)
                    if len(self.best) > self.budget.max_states:
                        stats.depth = depth + 1
                        return result("budget_exceeded")
            depth += 1
            frontier = following
            stats.depth = depth
            stats.peak = max(stats.peak, len(frontier))
            logger.debug("level %d: %d new states, %d known", depth, len(frontier), len(self.best))
        return result("exhausted")

    def _key(self, record: _Record):
        return (record.kind, canonical_key(record.labels, record.edges))


def search_synchronizing_execution(
    proto: BroadcastProtocol,
    n: int,
    policy: ConstraintPolicy,
    budget: Optional[SearchBudget] = None,
    initial_edges: Literal["all", "empty"] = "all",
    threads: int = 1,
    initial_labels: Optional[tuple[str, ...]] = None,
) -> SearchResult:
    """
    Breadth-first search for a synchronizing execution on ``n`` nodes.

    States are configurations paired with the kind of the next step, up to
    isomorphism. For a fixed node count the space is finite, so an
    ``exhausted`` verdict proves that no execution with ``n`` nodes exists
    under the policy. Unconstrained searches on more than
    ``UNCONSTRAINED_ENUMERATION_LIMIT`` nodes run on label multisets instead.

    :param proto: Protocol with a target set
    :type proto: BroadcastProtocol
    :param n: Number of nodes
    :type n: int
    :param policy: Regime and topology bounds; the witness satisfies both
    :type policy: ConstraintPolicy
    :param budget: Dedupe-state and depth limits
    :type budget: SearchBudget
    :param initial_edges: ``all`` topologies or only the ``empty`` one
    :param threads: Worker threads for level expansion; results do not
        depend on it
    :param initial_labels: Restrict the start to this labelling
    :return: Verdict, witness and counters
    :rtype: SearchResult
    """
    if n < 1:
        raise ValueError("a network has at least one node")
    if not proto.targets:
        raise ProtocolError("protocol has no target set")
    budget = budget or SearchBudget()
    if isinstance(policy.regime, Unconstrained) and n > UNCONSTRAINED_ENUMERATION_LIMIT and not policy.has_topology:
        verdict, w, counters = abstract_search(proto, n, budget.max_states, budget.max_depth)
        witness = concretize(proto, w) if w is not None else None
        logger.info("abstract search on %d nodes: %s", n, verdict)
        return SearchResult(
            verdict=verdict,
            witness=witness,
            stats=SearchStats(**counters),
            nodes=n,
            policy=str(policy),
            method="abstract",
        )
    outcome = _Search(proto, n, policy, budget, threads).run(initial_edges, initial_labels)
    logger.info("search on %d nodes under %s: %s", n, policy, outcome.verdict)
    return outcome


def minimal_synchronizing_size(
    proto: BroadcastProtocol, max_nodes: int, policy: ConstraintPolicy, **kwargs
) -> tuple[Optional[int], list[SearchResult]]:
    """Smallest node count in ``1..max_nodes`` with a witness, and every result tried."""
    results = []
    for n in range(1, max_nodes + 1):
        r = search_synchronizing_execution(proto, n, policy, **kwargs)
        results.append(r)
        if r.found:
            return n, results
    return None, results
