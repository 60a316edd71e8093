import logging
from typing import Iterable, Literal, Optional, Union

from BTrees.OOBTree import OOBTree as BTree
from pydantic import BaseModel

from rbnet.consts import DEFAULT_BUDGET_STATES, DEFAULT_TOKEN_CAP, PCHECK, PEND, PSIMUL, PSTART
from rbnet.errors import ControlTokenViolation
from rbnet.explore import expand_level
from rbnet.reductions.petri import PetriNet

logger = logging.getLogger("rbnet.marking")

Marking = tuple[int, ...]


class Reached(BaseModel):
    kind: Literal["reached"] = "reached"
    sequence: list[str]
    explored: int


class NotReachedWithinCap(BaseModel):
    """
    The final marking was not reached with every place kept under the cap.

    ``complete`` is false when the marking budget ran out before the capped
    space was exhausted.
    """

    kind: Literal["not_reached"] = "not_reached"
    explored: int
    complete: bool = True


MarkingVerdict = Union[Reached, NotReachedWithinCap]


def _vector(net: PetriNet, marking: dict[str, int]) -> Marking:
    return tuple(marking.get(p, 0) for p in net.places)


def _compiled(net: PetriNet) -> list[tuple[str, tuple, tuple]]:
    position = {p: i for i, p in enumerate(net.places)}
    return [
        (
            t.name,
            tuple((position[p], w) for p, w in t.pre.items()),
            tuple((position[p], w) for p, w in t.post.items()),
        )
        for t in net.transitions
    ]


def _fire(marking: Marking, pre, post) -> Optional[list[int]]:
    for i, w in pre:
        if marking[i] < w:
            return None
    out = list(marking)
    for i, w in pre:
        out[i] -= w
    for i, w in post:
        out[i] += w
    return out


def fire_sequence(net: PetriNet, sequence: Iterable[str]) -> dict[str, int]:
    """
    Fires the named transitions from the initial marking.

    :return: The resulting marking, marked places only
    :raises ValueError: when a transition is not enabled
    """
    compiled = {name: (pre, post) for name, pre, post in _compiled(net)}
    marking = _vector(net, net.initial)
    for pos, name in enumerate(sequence):
        if name not in compiled:
            raise ValueError(f"position {pos}: unknown transition {name!r}")
        fired = _fire(marking, *compiled[name])
        if fired is None:
            raise ValueError(f"position {pos}: {name} is not enabled")
        marking = tuple(fired)
    return {p: c for p, c in zip(net.places, marking) if c}


def bounded_marking_reachability(
    net: PetriNet,
    token_cap: int = DEFAULT_TOKEN_CAP,
    dead: Iterable[str] = (),
    threads: int = 1,
    max_markings: int = DEFAULT_BUDGET_STATES,
) -> MarkingVerdict:
    """
    Breadth-first search for the final marking, never putting more than
    ``token_cap`` tokens in a place.

    Markings with a token in a ``dead`` place are dropped. When the net has
    the ``pstart``/``psimul``/``pcheck``/``pend``/``preconf`` control places,
    every explored marking is checked to hold exactly one control token.

    :param net: Net to explore
    :type net: PetriNet
    :param token_cap: Per-place token bound, at least the final marking's
    :type token_cap: int
    :param dead: Places that can never be emptied again
    :param threads: Worker threads for level expansion
    :return: A shortest firing sequence, or the number of explored markings
    :rtype: Reached | NotReachedWithinCap
    :raises ControlTokenViolation: when a marking breaks the control invariant
    """
    if token_cap < max(net.final.values(), default=0):
        raise ValueError("token cap is below the final marking")
    compiled = _compiled(net)
    position = {p: i for i, p in enumerate(net.places)}
    dead_idx = [position[p] for p in dead if p in position]
    control = [
        i for p, i in position.items() if p in (PSTART, PSIMUL, PCHECK, PEND) or p.startswith("preconf_")
    ]
    check_control = PSTART in position and PEND in position
    start, goal = _vector(net, net.initial), _vector(net, net.final)

    def expand(marking: Marking) -> list[tuple[str, Marking]]:
        out = []
        for name, pre, post in compiled:
            fired = _fire(marking, pre, post)
            if fired is None or any(c > token_cap for c in fired):
                continue
            if any(fired[i] for i in dead_idx):
                continue
            out.append((name, tuple(fired)))
        return out

    parents = BTree()
    parents[start] = None
    frontier = [start]

    def sequence(marking: Marking) -> list[str]:
        names = []
        while parents[marking] is not None:
            marking, name = parents[marking]
            names.append(name)
        return list(reversed(names))

    if start == goal:
        return Reached(sequence=[], explored=1)
    depth = 0
    while frontier:
        following = []
        for marking, successors in zip(frontier, expand_level(frontier, expand, threads)):
            for name, after in successors:
                if after in parents:
                    continue
                if check_control and sum(after[i] for i in control) != 1:
                    raise ControlTokenViolation(f"{name} leaves {sum(after[i] for i in control)} control tokens")
                parents[after] = (marking, name)
                if after == goal:
                    logger.info("final marking reached at depth %d", depth + 1)
                    return Reached(sequence=sequence(after), explored=len(parents))
                following.append(after)
                if len(parents) > max_markings:
                    return NotReachedWithinCap(explored=len(parents), complete=False)
        depth += 1
        frontier = following
        logger.debug("marking level %d: %d new, %d known", depth, len(frontier), len(parents))
    return NotReachedWithinCap(explored=len(parents))
