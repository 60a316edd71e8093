import re
from collections import defaultdict
from functools import lru_cache
from typing import Iterable, Literal, Optional

from pydantic import BaseModel, ConfigDict, model_validator

from rbnet.consts import SINK_STATE
from rbnet.errors import ProtocolParseError

BROADCAST = "!"
RECEIVE = "?"

_TOKEN = re.compile(r"^[A-Za-z0-9_'.\-]+$")


class Transition(BaseModel):
    """
    One edge of the protocol automaton.

    Attributes
    ----------
    source : str
        State the node is in before the step
    action : str
        ``"!"`` for a broadcast, ``"?"`` for a reception
    message : str
        Message broadcast or received
    target : str
        State the node is in after the step
    """

    model_config = ConfigDict(frozen=True)

    source: str
    action: Literal["!", "?"]
    message: str
    target: str

    def __str__(self) -> str:
        return f"{self.source} {self.action}{self.message} {self.target}"


class BroadcastProtocol(BaseModel):
    """
    Finite broadcast protocol instantiated by every node of the network.

    States and messages keep their declaration order; everything derived from
    a protocol (net places, canonical forms, enumeration order) relies on it.

    Example:
    .. code-block:: python

        proto = parse_protocol(read_file("fig1.rbn"))
        assert proto.is_target(("q4", "q6", "q8"))
    """

    model_config = ConfigDict(frozen=True)

    states: tuple[str, ...]
    initial_states: frozenset[str]
    messages: tuple[str, ...]
    transitions: tuple[Transition, ...]
    target_set: Optional[frozenset[str]] = None

    @model_validator(mode="after")
    def _check(self):
        if not self.states:
            raise ValueError("protocol has no states")
        if not self.messages:
            raise ValueError("protocol has no messages")
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate state declaration")
        if len(set(self.messages)) != len(self.messages):
            raise ValueError("duplicate message declaration")
        known = set(self.states)
        if not self.initial_states <= known:
            raise ValueError(f"unknown initial states {sorted(self.initial_states - known)}")
        if self.target_set is not None and not self.target_set <= known:
            raise ValueError(f"unknown target states {sorted(self.target_set - known)}")
        alphabet = set(self.messages)
        for t in self.transitions:
            if t.source not in known or t.target not in known:
                raise ValueError(f"transition {t} uses an undeclared state")
            if t.message not in alphabet:
                raise ValueError(f"transition {t} uses an undeclared message")
        return self

    @property
    def targets(self) -> frozenset[str]:
        return self.target_set or frozenset()

    def state_index(self, state: str) -> int:
        return self.states.index(state)

    def is_target(self, labels: Iterable[str]) -> bool:
        targets = self.targets
        return all(label in targets for label in labels)


class ProtocolIndex:
    """
    Lookup tables over a protocol, built once per protocol and shared by the
    engines.

    Attributes
    ----------
    broadcasts : dict
        ``(state, message) -> tuple of targets`` for broadcast transitions
    receives : dict
        ``(state, message) -> tuple of targets`` for receive transitions
    outgoing_broadcasts : dict
        ``state -> sorted tuple of (message, target)``
    """

    def __init__(self, proto: BroadcastProtocol):
        self.protocol = proto
        broadcasts = defaultdict(list)
        receives = defaultdict(list)
        for t in proto.transitions:
            table = broadcasts if t.action == BROADCAST else receives
            if t.target not in table[(t.source, t.message)]:
                table[(t.source, t.message)].append(t.target)
        order = {s: i for i, s in enumerate(proto.states)}
        self.broadcasts = {
            key: tuple(sorted(v, key=order.__getitem__)) for key, v in broadcasts.items()
        }
        self.receives = {
            key: tuple(sorted(v, key=order.__getitem__)) for key, v in receives.items()
        }
        outgoing = defaultdict(list)
        for (state, message), targets in self.broadcasts.items():
            for target in targets:
                outgoing[state].append((message, target))
        self.outgoing_broadcasts = {s: tuple(sorted(v)) for s, v in outgoing.items()}
        self.dead_states = _dead_states(proto)

    def receive_targets(self, state: str, message: str) -> tuple[str, ...]:
        return self.receives.get((state, message), ())

    def broadcast_targets(self, state: str, message: str) -> tuple[str, ...]:
        return self.broadcasts.get((state, message), ())

    def can_broadcast(self, state: str) -> bool:
        return state in self.outgoing_broadcasts


@lru_cache(maxsize=128)
def protocol_index(proto: BroadcastProtocol) -> ProtocolIndex:
    return ProtocolIndex(proto)


def _dead_states(proto: BroadcastProtocol) -> frozenset[str]:
    """
    States from which no sequence of transitions leads into the target set.
    A node in such a state can never take part in a synchronizing run.
    """
    if proto.target_set is None:
        return frozenset()
    backward = defaultdict(set)
    for t in proto.transitions:
        backward[t.target].add(t.source)
    alive = set(proto.targets)
    todo = list(alive)
    while todo:
        state = todo.pop()
        for prev in backward[state]:
            if prev not in alive:
                alive.add(prev)
                todo.append(prev)
    return frozenset(s for s in proto.states if s not in alive)


def complete_with_sink(proto: BroadcastProtocol, sink: str = SINK_STATE) -> BroadcastProtocol:
    """
    Sends every reception the protocol leaves unspecified to a global sink
    state that receives every message.

    :param proto: Protocol to complete
    :type proto: BroadcastProtocol
    :param sink: Name of the sink state, added if missing
    :type sink: str
    :return: Completed protocol; the sink is never a target state
    :rtype: BroadcastProtocol
    """
    index = protocol_index(proto)
    extra = []
    for state in proto.states:
        if state == sink:
            continue
        for message in proto.messages:
            if not index.receive_targets(state, message):
                extra.append(Transition(source=state, action=RECEIVE, message=message, target=sink))
    for message in proto.messages:
        if sink not in index.receive_targets(sink, message):
            extra.append(Transition(source=sink, action=RECEIVE, message=message, target=sink))
    states = proto.states if sink in proto.states else proto.states + (sink,)
    return proto.model_copy(
        update={"states": states, "transitions": proto.transitions + tuple(extra)}
    )


def parse_protocol(text: str) -> BroadcastProtocol:
    """
    Parses the protocol description language.

    .. code-block:: text

        states q0 q1 q5
        init q0
        target q1 q5
        msg a
        q0 !a q1     # broadcast
        q0 ?a q5     # reception

    ``states`` and ``msg`` may be omitted, in which case they are collected
    in order of first use. ``!!a`` and ``??a`` are accepted as well.

    :raises ProtocolParseError: on malformed lines, with the line number
    """
    declared_states: Optional[list[str]] = None
    declared_messages: Optional[list[str]] = None
    initial: list[str] = []
    target: Optional[list[str]] = None
    transitions: list[Transition] = []
    seen_states: list[str] = []
    seen_messages: list[str] = []

    def note(bucket: list[str], name: str):
        if name not in bucket:
            bucket.append(name)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        for w in words:
            if not _TOKEN.match(w.lstrip("!?")):
                raise ProtocolParseError(lineno, f"bad token {w!r}")
        head, rest = words[0], words[1:]
        if head in ("states", "init", "target", "msg"):
            if len(set(rest)) != len(rest):
                raise ProtocolParseError(lineno, f"duplicate names in {head!r}")
            if head == "states":
                if declared_states is not None:
                    raise ProtocolParseError(lineno, "states declared twice")
                declared_states = rest
            elif head == "init":
                initial.extend(rest)
            elif head == "target":
                target = (target or []) + rest
            else:
                if declared_messages is not None:
                    raise ProtocolParseError(lineno, "messages declared twice")
                declared_messages = rest
            continue
        if len(words) != 3:
            raise ProtocolParseError(lineno, "expected '<source> !m|?m <target>'")
        source, action, dest = words
        if action.startswith("!"):
            kind, message = BROADCAST, action.lstrip("!")
        elif action.startswith("?"):
            kind, message = RECEIVE, action.lstrip("?")
        else:
            raise ProtocolParseError(lineno, f"unknown action {action!r}")
        if not message:
            raise ProtocolParseError(lineno, "missing message name")
        for state in (source, dest):
            if declared_states is not None and state not in declared_states:
                raise ProtocolParseError(lineno, f"undeclared state {state!r}")
            note(seen_states, state)
        if declared_messages is not None and message not in declared_messages:
            raise ProtocolParseError(lineno, f"undeclared message {message!r}")
        note(seen_messages, message)
        transitions.append(Transition(source=source, action=kind, message=message, target=dest))

    states = declared_states
    if states is None:
        states = list(seen_states)
        for name in initial + (target or []):
            note(states, name)
    messages = declared_messages if declared_messages is not None else seen_messages
    try:
        return BroadcastProtocol(
            states=tuple(states),
            initial_states=frozenset(initial),
            messages=tuple(messages),
            transitions=tuple(dict.fromkeys(transitions)),
            target_set=frozenset(target) if target is not None else None,
        )
    except ValueError as e:
        raise ProtocolParseError(0, str(e)) from e


def format_protocol(proto: BroadcastProtocol) -> str:
    """
    Prints a protocol back in the description language; the output parses to
    an equal protocol.
    """
    lines = [
        "states " + " ".join(proto.states),
        "init " + " ".join(s for s in proto.states if s in proto.initial_states),
    ]
    if proto.target_set is not None:
        lines.append("target " + " ".join(s for s in proto.states if s in proto.target_set))
    lines.append("msg " + " ".join(proto.messages))
    lines.extend(str(t) for t in proto.transitions)
    return "\n".join(lines) + "\n"
