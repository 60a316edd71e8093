import itertools
from typing import Annotated, Iterable, Literal, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from rbnet.configuration import (
    Configuration,
    Edge,
    _dot_body,
    juxtapose,
    norm_edge,
    norm_edges,
)
from rbnet.errors import AlternationError, DisabledStep, InvalidSchedule, NotCommBounded
from rbnet.protocol import BroadcastProtocol, protocol_index

Outcome = tuple[tuple[int, str], ...]


class Reconfiguration(BaseModel):
    """
    Edge update with nodes and labels fixed; both sets empty for a trivial step.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["reconf"] = "reconf"
    added: frozenset[Edge] = frozenset()
    removed: frozenset[Edge] = frozenset()

    @field_validator("added", "removed", mode="before")
    @classmethod
    def _normalize(cls, value):
        return norm_edges(value)

    @model_validator(mode="after")
    def _disjoint(self):
        overlap = self.added & self.removed
        if overlap:
            raise ValueError(f"edges both added and removed: {sorted(overlap)}")
        for u, v in self.added | self.removed:
            if u == v:
                raise ValueError(f"self-loop on node {u}")
        return self

    @classmethod
    def toggle(cls, edges: frozenset[Edge], toggles: Iterable[Edge]) -> "Reconfiguration":
        """Step flipping every pair in ``toggles`` relative to the current ``edges``."""
        toggles = frozenset(toggles)
        return cls.model_construct(
            kind="reconf", added=toggles - edges, removed=toggles & edges
        )

    @property
    def size(self) -> int:
        return len(self.added) + len(self.removed)

    @property
    def trivial(self) -> bool:
        return not self.added and not self.removed

    def toggled(self) -> frozenset[Edge]:
        return self.added | self.removed


class Communication(BaseModel):
    """
    One node broadcasts, every neighbour receives.

    Attributes
    ----------
    broadcaster : int
        Node that broadcasts
    message : str
        Broadcast message
    outcome : Optional[tuple]
        ``((node, new_state), ...)`` for the broadcaster and each of its
        neighbours; may be omitted when every involved node has a single
        applicable transition
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["comm"] = "comm"
    broadcaster: int
    message: str
    outcome: Optional[Outcome] = None

    def outcome_map(self) -> dict[int, str]:
        return dict(self.outcome or ())


Step = Annotated[Union[Reconfiguration, Communication], Field(discriminator="kind")]


class Execution(BaseModel):
    """
    A start configuration and the steps applied to it.

    Steps must alternate between communications and reconfigurations;
    :func:`replay` enforces it together with enabledness.
    """

    model_config = ConfigDict(frozen=True)

    protocol: BroadcastProtocol
    initial: Configuration
    steps: tuple[Step, ...] = ()

    @property
    def communications(self) -> int:
        return sum(1 for s in self.steps if isinstance(s, Communication))

    @property
    def reconfigured(self) -> int:
        return sum(s.size for s in self.steps if isinstance(s, Reconfiguration))

    @property
    def comm_bounded(self) -> bool:
        return (
            bool(self.steps)
            and isinstance(self.steps[0], Communication)
            and isinstance(self.steps[-1], Communication)
        )

    def require_comm_bounded(self):
        if not self.comm_bounded:
            raise NotCommBounded("execution must start and end with a communication step")

    def is_initial(self) -> bool:
        return all(label in self.protocol.initial_states for label in self.initial.labels)


def _apply_reconfiguration(index: int, edges: frozenset[Edge], n: int, step: Reconfiguration):
    for u, v in step.added | step.removed:
        if v >= n or u < 0:
            raise DisabledStep(index, f"edge {(u, v)} leaves the node set")
    present = step.removed - edges
    if present:
        raise DisabledStep(index, f"removed edges {sorted(present)} are absent")
    absent = step.added & edges
    if absent:
        raise DisabledStep(index, f"added edges {sorted(absent)} are already present")
    return (edges - step.removed) | step.added


def _apply_communication(
    index: int, proto: BroadcastProtocol, g: Configuration, step: Communication
) -> tuple[str, ...]:
    idx = protocol_index(proto)
    b = step.broadcaster
    if not 0 <= b < g.size:
        raise DisabledStep(index, f"unknown broadcaster {b}")
    options = {b: idx.broadcast_targets(g.labels[b], step.message)}
    if not options[b]:
        raise DisabledStep(index, f"node {b} in {g.labels[b]!r} cannot broadcast {step.message!r}")
    for v in g.neighbours(b):
        options[v] = idx.receive_targets(g.labels[v], step.message)
        if not options[v]:
            raise DisabledStep(
                index, f"neighbour {v} in {g.labels[v]!r} cannot receive {step.message!r}"
            )
    labels = list(g.labels)
    if step.outcome is None:
        for node, targets in options.items():
            if len(targets) > 1:
                raise DisabledStep(index, f"ambiguous transition for node {node}, outcome required")
            labels[node] = targets[0]
        return tuple(labels)
    outcome = step.outcome_map()
    if set(outcome) != set(options):
        raise DisabledStep(
            index, f"outcome covers nodes {sorted(outcome)}, expected {sorted(options)}"
        )
    for node, state in outcome.items():
        if state not in options[node]:
            raise DisabledStep(index, f"node {node} cannot move to {state!r}")
        labels[node] = state
    return tuple(labels)


def replay(e: Execution) -> list[Configuration]:
    """
    Applies the steps of ``e`` in order.

    :param e: Execution to replay
    :type e: Execution
    :return: The configurations visited, ``len(e.steps) + 1`` of them
    :rtype: list[Configuration]
    :raises DisabledStep: on the first step that cannot be applied
    :raises AlternationError: on two consecutive steps of the same kind
    """
    g = e.initial
    configurations = [g]
    previous = None
    for i, step in enumerate(e.steps):
        if previous is not None and step.kind == previous:
            raise AlternationError(i)
        previous = step.kind
        if isinstance(step, Reconfiguration):
            g = g.with_edges(_apply_reconfiguration(i, g.edges, g.size, step))
        else:
            g = g.with_labels(_apply_communication(i, e.protocol, g, step))
        configurations.append(g)
    return configurations


def with_outcomes(e: Execution, configurations: Optional[list[Configuration]] = None) -> Execution:
    """Copy of ``e`` where every communication states its outcome explicitly."""
    configurations = configurations or replay(e)
    steps = []
    for i, step in enumerate(e.steps):
        if isinstance(step, Communication) and step.outcome is None:
            before, after = configurations[i], configurations[i + 1]
            involved = [step.broadcaster] + before.neighbours(step.broadcaster)
            outcome = tuple((v, after.labels[v]) for v in sorted(involved))
            step = Communication(broadcaster=step.broadcaster, message=step.message, outcome=outcome)
        steps.append(step)
    return e.model_copy(update={"steps": tuple(steps)})


def trim_to_communications(e: Execution) -> Execution:
    """
    Folds a leading reconfiguration into the initial topology and drops a
    trailing one. Labels along the run, hence synchronization, are unchanged.
    """
    initial, steps = e.initial, list(e.steps)
    if steps and isinstance(steps[0], Reconfiguration):
        initial = initial.with_edges(_apply_reconfiguration(0, initial.edges, initial.size, steps[0]))
        steps = steps[1:]
    if steps and isinstance(steps[-1], Reconfiguration):
        steps = steps[:-1]
    return e.model_copy(update={"initial": initial, "steps": tuple(steps)})


def shift_step(step, offset: int):
    if offset == 0:
        return step
    if isinstance(step, Reconfiguration):
        return Reconfiguration.model_construct(
            kind="reconf",
            added=frozenset((u + offset, v + offset) for u, v in step.added),
            removed=frozenset((u + offset, v + offset) for u, v in step.removed),
        )
    outcome = None
    if step.outcome is not None:
        outcome = tuple((v + offset, s) for v, s in step.outcome)
    return Communication(broadcaster=step.broadcaster + offset, message=step.message, outcome=outcome)


class ExecutionBuilder:
    """
    Appends steps while keeping communications and reconfigurations
    alternating.

    Two communications in a row get a trivial reconfiguration in between;
    two reconfigurations in a row are merged into one step.

    Attributes
    ----------
    edges : frozenset
        Current topology of the execution being built
    """

    def __init__(self, protocol: BroadcastProtocol, initial: Configuration):
        self.protocol = protocol
        self.initial = initial
        self.edges = initial.edges
        self.steps: list = []
        self._pending: Optional[frozenset[Edge]] = None
        self._pending_base: Optional[frozenset[Edge]] = None

    def reconfigure(self, toggles: Iterable[Edge]):
        toggles = frozenset(norm_edge(*e) for e in toggles)
        if not toggles and self._pending is None:
            return
        if self._pending is None:
            self._pending_base = self.edges
            self._pending = toggles
        else:
            self._pending = self._pending ^ toggles
        self.edges = self.edges ^ toggles

    def set_edges(self, edges: Iterable[Edge]):
        self.reconfigure(self.edges ^ norm_edges(edges))

    def communicate(self, step: Communication):
        if self._pending is not None:
            self._flush()
        elif self.steps and isinstance(self.steps[-1], Communication):
            self.steps.append(Reconfiguration())
        self.steps.append(step)

    def _flush(self):
        self.steps.append(Reconfiguration.toggle(self._pending_base, self._pending))
        self._pending = None
        self._pending_base = None

    def seal(self, keep_last_reconfiguration: bool = True) -> Execution:
        if self._pending is not None:
            if keep_last_reconfiguration:
                self._flush()
            else:
                self.edges = self._pending_base
                self._pending = None
        return Execution(protocol=self.protocol, initial=self.initial, steps=tuple(self.steps))


def sequential_schedule(e: Execution, e2: Execution) -> str:
    return "L" * len(e.steps) + "R" * len(e2.steps)


def shuffle(e: Execution, e2: Execution, schedule: Optional[str] = None, repair: bool = False) -> Execution:
    """
    Interleaves two executions over the juxtaposition of their initial
    configurations.

    :param e: Left execution, keeps its node numbers
    :param e2: Right execution, shifted past the nodes of ``e``
    :param schedule: One letter per move: ``L`` advances ``e``, ``R``
        advances ``e2``, ``M`` merges the next reconfiguration of each into a
        single step. ``None`` runs ``e`` then ``e2`` and implies ``repair``.
    :param repair: Insert trivial reconfigurations between adjacent
        communications and merge adjacent reconfigurations instead of
        rejecting the schedule
    :raises InvalidSchedule: when the schedule does not consume both
        executions exactly, or breaks alternation without ``repair``
    """
    if e.protocol != e2.protocol:
        raise InvalidSchedule("executions run different protocols")
    if schedule is None:
        schedule, repair = sequential_schedule(e, e2), True
    offset = e.initial.size
    left, right = iter(e.steps), iter(shift_step(s, offset) for s in e2.steps)
    moves = []
    for pos, token in enumerate(schedule):
        try:
            if token == "L":
                moves.append(next(left))
            elif token == "R":
                moves.append(next(right))
            elif token == "M":
                a, b = next(left), next(right)
                if not isinstance(a, Reconfiguration) or not isinstance(b, Reconfiguration):
                    raise InvalidSchedule(f"position {pos}: merge needs two reconfigurations")
                moves.append(
                    Reconfiguration.model_construct(
                        kind="reconf", added=a.added | b.added, removed=a.removed | b.removed
                    )
                )
            else:
                raise InvalidSchedule(f"position {pos}: unknown token {token!r}")
        except StopIteration:
            raise InvalidSchedule(f"position {pos}: schedule outruns its execution") from None
    if next(left, None) is not None or next(right, None) is not None:
        raise InvalidSchedule("schedule does not consume both executions")

    initial = juxtapose(e.initial, e2.initial)
    if not repair:
        for i, (a, b) in enumerate(itertools.pairwise(moves)):
            if a.kind == b.kind:
                raise InvalidSchedule(f"steps {i} and {i + 1} are both {a.kind}")
        return Execution(protocol=e.protocol, initial=initial, steps=tuple(moves))
    builder = ExecutionBuilder(e.protocol, initial)
    for move in moves:
        if isinstance(move, Reconfiguration):
            builder.reconfigure(move.toggled())
        else:
            builder.communicate(move)
    return builder.seal()


# atomic form: each reconfiguration of size d becomes d single-link toggles,
# trivial reconfigurations disappear
Atom = Union[Communication, Edge]


def atomic_word(e: Execution) -> list[Atom]:
    word: list[Atom] = []
    for step in e.steps:
        if isinstance(step, Communication):
            word.append(step)
        else:
            word.extend(sorted(step.toggled()))
    return word


def word_letters(word: Sequence[Atom]) -> str:
    return "".join("C" if isinstance(a, Communication) else "A" for a in word)


def execution_to_dot(e: Execution, name: str = "run") -> str:
    """One cluster per visited configuration."""
    lines = [f"graph {name} {{"]
    for i, g in enumerate(replay(e)):
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f'    label="step {i}";')
        lines.extend(_dot_body(g, f"c{i}_", "    "))
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
