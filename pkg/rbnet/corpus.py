import random
from typing import Iterator

from rbnet.protocol import BROADCAST, RECEIVE, BroadcastProtocol, Transition


def random_protocol(
    rng: random.Random,
    max_states: int = 6,
    max_messages: int = 3,
    density: float = 0.1,
) -> BroadcastProtocol:
    """
    Random protocol for oracle comparisons.

    States are ``q0..q{n-1}``, ``q0`` is always initial, and every state is
    a target with probability one third, with at least one target overall.
    Each ``(state, action, message, target)`` quadruple is present with
    probability ``density``.

    :param rng: Source of randomness; the same seed gives the same protocol
    :type rng: random.Random
    """
    n = rng.randint(2, max_states)
    states = tuple(f"q{i}" for i in range(n))
    messages = tuple("abcdefgh"[: rng.randint(1, max_messages)])
    initial = {states[0]} | {s for s in states[1:] if rng.random() < 0.2}
    targets = {s for s in states if rng.random() < 1 / 3} or {rng.choice(states)}
    transitions = [
        Transition(source=src, action=action, message=m, target=dst)
        for src in states
        for action in (BROADCAST, RECEIVE)
        for m in messages
        for dst in states
        if rng.random() < density
    ]
    used = {t.message for t in transitions}
    if not used:
        transitions.append(
            Transition(source=states[0], action=BROADCAST, message=messages[0], target=rng.choice(states))
        )
    return BroadcastProtocol(
        states=states,
        initial_states=frozenset(initial),
        messages=messages,
        transitions=tuple(transitions),
        target_set=frozenset(targets),
    )


def protocol_corpus(seed: int, size: int, **kwargs) -> Iterator[BroadcastProtocol]:
    rng = random.Random(seed)
    for _ in range(size):
        yield random_protocol(rng, **kwargs)
