import re
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from rbnet.errors import MinskyParseError
from rbnet.protocol import BROADCAST, RECEIVE, BroadcastProtocol, Transition, complete_with_sink

COUNTERS = (1, 2)
START_STATE = "M0"

_LINE = re.compile(
    r"^(?P<loc>[A-Za-z0-9_.]+)\s*:\s*(?:"
    r"(?P<halt>halt)"
    r"|inc\s+c(?P<ic>\d+)\s*->\s*(?P<inext>[A-Za-z0-9_.]+)"
    r"|testdec\s+c(?P<tc>\d+)\s*->\s*(?P<tpos>[A-Za-z0-9_.]+)\s*\|\s*(?P<tzero>[A-Za-z0-9_.]+)"
    r")$"
)


class Inc(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["inc"] = "inc"
    counter: int
    next: str


class TestDec(BaseModel):
    """Decrements the counter if it is positive, jumps to ``if_zero`` otherwise."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["testdec"] = "testdec"
    counter: int
    if_positive: str
    if_zero: str


Instruction = Annotated[Union[Inc, TestDec], Field(discriminator="kind")]


class MinskyMachine(BaseModel):
    """
    Two-counter machine. Every location but ``halt`` carries one instruction;
    ``locations`` keeps the declaration order.
    """

    model_config = ConfigDict(frozen=True)

    locations: tuple[str, ...]
    initial: str
    halt: str
    instructions: dict[str, Instruction]

    @model_validator(mode="after")
    def _check(self):
        known = set(self.locations)
        if self.initial not in known or self.halt not in known:
            raise ValueError("initial and halt must be declared locations")
        if self.halt in self.instructions:
            raise ValueError("halt location carries an instruction")
        for loc in self.locations:
            if loc != self.halt and loc not in self.instructions:
                raise ValueError(f"location {loc!r} has no instruction")
        for loc, ins in self.instructions.items():
            if ins.counter not in COUNTERS:
                raise ValueError(f"{loc}: unknown counter c{ins.counter}")
            successors = [ins.next] if isinstance(ins, Inc) else [ins.if_positive, ins.if_zero]
            for s in successors:
                if s not in known:
                    raise ValueError(f"{loc}: jump to undeclared location {s!r}")
        return self


def parse_minsky(text: str) -> MinskyMachine:
    """
    Parses one instruction per line:

    .. code-block:: text

        L0: inc c1 -> L1
        L1: testdec c1 -> L1 | H
        H: halt

    The first location is the initial one; exactly one location halts.

    :raises MinskyParseError: with the offending line number
    """
    locations: list[str] = []
    instructions: dict = {}
    halts: list[str] = []
    referenced: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.match(line)
        if match is None:
            raise MinskyParseError(lineno, f"cannot parse {line!r}")
        loc = match["loc"]
        if loc in locations:
            raise MinskyParseError(lineno, f"location {loc!r} defined twice")
        locations.append(loc)
        if match["halt"]:
            halts.append(loc)
            continue
        if match["ic"] is not None:
            ins = Inc(counter=int(match["ic"]), next=match["inext"])
            targets = [ins.next]
        else:
            ins = TestDec(counter=int(match["tc"]), if_positive=match["tpos"], if_zero=match["tzero"])
            targets = [ins.if_positive, ins.if_zero]
        if ins.counter not in COUNTERS:
            raise MinskyParseError(lineno, f"unknown counter c{ins.counter}")
        for t in targets:
            referenced.setdefault(t, lineno)
        instructions[loc] = ins
    if not locations:
        raise MinskyParseError(0, "empty machine")
    if len(halts) != 1:
        raise MinskyParseError(0, f"expected one halt location, found {len(halts)}")
    for loc, lineno in referenced.items():
        if loc not in locations:
            raise MinskyParseError(lineno, f"undefined location {loc!r}")
    return MinskyMachine(
        locations=tuple(locations), initial=locations[0], halt=halts[0], instructions=instructions
    )


def format_minsky(m: MinskyMachine) -> str:
    lines = []
    for loc in m.locations:
        ins = m.instructions.get(loc)
        if ins is None:
            lines.append(f"{loc}: halt")
        elif isinstance(ins, Inc):
            lines.append(f"{loc}: inc c{ins.counter} -> {ins.next}")
        else:
            lines.append(f"{loc}: testdec c{ins.counter} -> {ins.if_positive} | {ins.if_zero}")
    return "\n".join(lines) + "\n"


class MinskyRun(BaseModel):
    halted: bool
    steps: int
    location: str
    counters: tuple[int, int]


def run_minsky(m: MinskyMachine, fuel: int = 10_000) -> MinskyRun:
    """Runs the machine from zero counters for at most ``fuel`` instructions."""
    loc, counters, steps = m.initial, [0, 0], 0
    while loc != m.halt and steps < fuel:
        ins = m.instructions[loc]
        c = ins.counter - 1
        if isinstance(ins, Inc):
            counters[c] += 1
            loc = ins.next
        elif counters[c] > 0:
            counters[c] -= 1
            loc = ins.if_positive
        else:
            loc = ins.if_zero
        steps += 1
    return MinskyRun(halted=loc == m.halt, steps=steps, location=loc, counters=tuple(counters))


# messages shared by every instruction module
def _messages() -> list[str]:
    shared = ["start", "i-init", "i-exit", "d-exit", "t-exit"] + [f"aux{i}" for i in range(1, 6)]
    for j in COUNTERS:
        for family in ("i", "d", "t"):
            shared += [f"{family}-ask{j}", f"{family}-ack{j}", f"{family}-ok{j}"]
    return shared


def counter_states(j: int) -> list[str]:
    return [f"zero_{j}", f"ask_{j}", f"ack_{j}", f"one_{j}", f"dask_{j}", f"dack_{j}", f"zerop_{j}"]


class _Builder:
    def __init__(self):
        self.states: list[str] = []
        self.transitions: list[Transition] = []

    def state(self, name: str) -> str:
        if name not in self.states:
            self.states.append(name)
        return name

    def chain(self, start: str, *moves: tuple[str, str, str]):
        """``moves`` are ``(action, message, target)`` triples walked from ``start``."""
        source = self.state(start)
        for action, message, target in moves:
            self.state(target)
            self.transitions.append(
                Transition(source=source, action=action, message=message, target=target)
            )
            source = target

    def loop_all(self, state: str, messages):
        for message in messages:
            self.transitions.append(
                Transition(source=state, action=RECEIVE, message=message, target=state)
            )


def _control(b: _Builder, m: MinskyMachine):
    b.chain(START_STATE, (BROADCAST, "start", m.initial))
    for loc in m.locations:
        b.state(loc)
        ins = m.instructions.get(loc)
        if ins is None:
            continue
        j = ins.counter
        if isinstance(ins, Inc):
            b.chain(
                loc,
                (BROADCAST, "i-init", f"{loc}_inc1"),
                (RECEIVE, "aux1", f"{loc}_inc2"),
                (BROADCAST, f"i-ask{j}", f"{loc}_inc3"),
                (RECEIVE, f"i-ack{j}", f"{loc}_inc4"),
                (BROADCAST, f"i-ok{j}", f"{loc}_inc5"),
                (RECEIVE, "aux2", f"{loc}_inc6"),
                (RECEIVE, "aux3", f"{loc}_inc7"),
                (RECEIVE, "aux3", f"{loc}_incm"),
                (BROADCAST, "i-exit", ins.next),
            )
            continue
        b.chain(
            loc,
            (BROADCAST, f"d-ask{j}", f"{loc}_dec1"),
            (RECEIVE, f"d-ack{j}", f"{loc}_dec2"),
            (BROADCAST, f"d-ok{j}", f"{loc}_dec3"),
            (RECEIVE, "aux4", f"{loc}_dec4"),
            (RECEIVE, "aux5", f"{loc}_dec5"),
            (RECEIVE, "aux5", f"{loc}_decm"),
            (BROADCAST, "d-exit", ins.if_positive),
        )
        b.chain(
            loc,
            (BROADCAST, f"t-ask{j}", f"{loc}_tst1"),
            (RECEIVE, f"t-ack{j}", f"{loc}_tst2"),
            (BROADCAST, f"t-ok{j}", f"{loc}_tst3"),
            (RECEIVE, "aux5", f"{loc}_tst4"),
            (RECEIVE, "aux5", f"{loc}_tstm"),
            (BROADCAST, "t-exit", ins.if_zero),
        )


def _counter(b: _Builder, j: int):
    zero, ask, ack, one, dask, dack, zerop = counter_states(j)
    b.chain(zero, (RECEIVE, f"i-ask{j}", ask), (RECEIVE, f"i-ok{j}", zero))
    b.chain(ask, (BROADCAST, f"i-ack{j}", ack), (RECEIVE, f"i-ok{j}", one))
    b.chain(one, (RECEIVE, f"d-ask{j}", dask), (RECEIVE, f"d-ok{j}", one))
    b.chain(dask, (BROADCAST, f"d-ack{j}", dack), (RECEIVE, f"d-ok{j}", zerop))
    idle = ["i-init", "i-ask1", "i-ask2", "i-ok1", "i-ok2", "i-exit", "d-exit"]
    b.loop_all(one, idle)


def _auxiliary(b: _Builder):
    b.chain("free1", (RECEIVE, "i-init", "f1_got"), (BROADCAST, "aux1", "done1"))
    b.state("free2")
    for j in COUNTERS:
        b.chain(
            "free2",
            (RECEIVE, f"i-ask{j}", f"f2_ask{j}"),
            (RECEIVE, f"i-ok{j}", f"f2_ok{j}"),
            (BROADCAST, "aux2", "done2"),
        )
    b.state("free3")
    for j in COUNTERS:
        b.chain("free3", (RECEIVE, f"i-ok{j}", "f3_ok"))
    b.chain("f3_ok", (BROADCAST, "aux3", "done3"))
    b.state("free4")
    for j in COUNTERS:
        b.chain(
            "free4",
            (RECEIVE, f"t-ask{j}", f"f4_t{j}"),
            (BROADCAST, f"t-ack{j}", f"f4_t{j}ack"),
            (RECEIVE, f"t-ok{j}", "done4"),
        )
    for j in COUNTERS:
        b.chain("free4", (RECEIVE, f"d-ask{j}", f"f4_d{j}"), (RECEIVE, f"d-ok{j}", "f4_dok"))
    b.chain("f4_dok", (BROADCAST, "aux4", "done4"))
    b.state("free5")
    for j in COUNTERS:
        b.chain("free5", (RECEIVE, f"d-ok{j}", "f5_ok"))
        b.chain("free5", (RECEIVE, f"t-ok{j}", "f5_ok"))
    b.chain("f5_ok", (BROADCAST, "aux5", "done5"))


AUXILIARY_INITIAL = tuple(f"free{i}" for i in range(1, 6))
AUXILIARY_DONE = tuple(f"done{i}" for i in range(1, 6))


def encode_minsky(m: MinskyMachine) -> BroadcastProtocol:
    """
    Builds a protocol whose 1-constrained synchronizing runs simulate halting
    runs of ``m``.

    A control node walks through one module per executed instruction; a
    counter's value is the number of its nodes in ``one_j`` linked to the
    control node. Auxiliary nodes acknowledge each phase of a module so that
    every link change is paid for by a communication. Terminal states receive
    every message, and every reception left unspecified leads to the sink.

    The target set is the halt location together with ``one_j``,
    ``zerop_j`` and ``done1`` to ``done5``.

    :param m: Machine to encode
    :type m: MinskyMachine
    :return: Protocol with its target set
    :rtype: BroadcastProtocol
    :raises MinskyParseError: when a location name clashes with a gadget state
    """
    reserved = {START_STATE} | set(AUXILIARY_INITIAL) | set(AUXILIARY_DONE)
    for j in COUNTERS:
        reserved.update(counter_states(j))
    clash = reserved & set(m.locations)
    if clash:
        raise MinskyParseError(0, f"location names clash with gadget states: {sorted(clash)}")

    b = _Builder()
    messages = _messages()
    _control(b, m)
    for j in COUNTERS:
        _counter(b, j)
    _auxiliary(b)
    terminal = [m.halt] + [f"zerop_{j}" for j in COUNTERS] + list(AUXILIARY_DONE)
    for state in terminal:
        b.loop_all(state, messages)

    targets = {m.halt} | set(AUXILIARY_DONE)
    for j in COUNTERS:
        targets |= {f"one_{j}", f"zerop_{j}"}
    initial = {START_STATE, "zero_1", "zero_2"} | set(AUXILIARY_INITIAL)
    proto = BroadcastProtocol(
        states=tuple(b.states),
        initial_states=frozenset(initial),
        messages=tuple(messages),
        transitions=tuple(dict.fromkeys(b.transitions)),
        target_set=frozenset(targets),
    )
    return complete_with_sink(proto)
