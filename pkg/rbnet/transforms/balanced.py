import logging
from collections import deque
from typing import Callable, Iterator, Optional

from rbnet.configuration import power
from rbnet.errors import InsufficientCopies, NotBalanced
from rbnet.execution import (
    Communication,
    Execution,
    ExecutionBuilder,
    atomic_word,
    shift_step,
    trim_to_communications,
    with_outcomes,
    word_letters,
)
from rbnet.policy import ConstraintPolicy, KBalanced
from rbnet.validate import PhaseDecomposition, decompose_phases, validate_execution

logger = logging.getLogger("rbnet.transforms")

# a communication that another copy's next single-link step may follow
SERVES = "C"
# a communication and the single-link step right after it, taken together
PAIRED = "X"
# a single-link step right after another one
REPEATED = "A"


def required_copies(kappa: int) -> int:
    return kappa * kappa + kappa


def word_units(letters: str) -> list[tuple[str, int]]:
    """
    Cuts an atomic word into the pieces one copy takes at a time.

    :param letters: Atomic word starting with ``C``
    :type letters: str
    :return: ``(kind, position)`` pairs, ``kind`` one of ``C``, ``X``, ``A``
    :rtype: list[tuple[str, int]]
    """
    units, t = [], 0
    while t < len(letters):
        if letters[t] == "A":
            units.append((REPEATED, t))
            t += 1
        elif t + 1 < len(letters) and letters[t + 1] == "A":
            units.append((PAIRED, t))
            t += 2
        else:
            units.append((SERVES, t))
            t += 1
    return units


class CopySchedule:
    """
    Order in which copies of one atomic word are read so that no two
    single-link steps end up next to each other.

    Copies are split into main copies and ``kappa`` helpers. Main copy
    ``l + 1`` lends its ``j``-th lone communication to main copy ``l`` for
    the ``j``-th repeated single-link step, the last main copy borrows from
    the helpers, one communication each. In nonpositive phases a copy's
    ``j``-th repeated single-link step comes before its ``j``-th lone
    communication, so there the lending copy runs ahead of the borrowing
    one instead of behind it; the same recursion covers both.

    Once every main copy is past its last repeated step the helpers finish
    in a chain of their own, the last helper borrowing from what the main
    copies have left, their closing communications included.

    Attributes
    ----------
    order : list[tuple[int, int]]
        ``(copy, position)`` for every letter read, in order
    """

    def __init__(self, letters: str, copies: int, kappa: int):
        units = word_units(letters)
        self.mains = list(range(copies - kappa))
        self.helpers = list(range(copies - kappa, copies))
        self.queues: dict[int, deque] = {c: deque(units) for c in self.mains}
        helper_units = units
        if kappa and _first(units, REPEATED) < _first(units, SERVES):
            # nothing to lend before the first repeated step: the helper lends
            # the opening communication and its paired step has to borrow later
            helper_units = [(SERVES, 0), (REPEATED, 1)] + units[1:]
        for c in self.helpers:
            self.queues[c] = deque(helper_units)
        self.lender: dict[int, Callable[[], int]] = {}
        self.order: list[tuple[int, int]] = []

    def build(self) -> list[tuple[int, int]]:
        helpers: Iterator[int] = iter(self.helpers)
        for i, c in enumerate(self.mains[:-1]):
            self.lender[c] = lambda nxt=self.mains[i + 1]: nxt
        self.lender[self.mains[-1]] = lambda: next(helpers)
        for c in self.mains:
            while self._repeated_left(c):
                self._take(c)

        for i, c in enumerate(self.helpers[:-1]):
            self.lender[c] = lambda nxt=self.helpers[i + 1]: nxt
        if self.helpers:
            self.lender[self.helpers[-1]] = self._leftover
        for c in self.helpers + self.mains:
            while self.queues[c]:
                self._take(c)
        return self.order

    def _repeated_left(self, copy: int) -> bool:
        return any(kind == REPEATED for kind, _ in self.queues[copy])

    def _leftover(self) -> int:
        return next(c for c in self.mains if any(kind == SERVES for kind, _ in self.queues[c]))

    def _take(self, copy: int):
        kind, t = self.queues[copy].popleft()
        if kind == REPEATED:
            self._lend(self.lender[copy]())
        self.order.append((copy, t))
        if kind == PAIRED:
            self.order.append((copy, t + 1))

    def _lend(self, copy: int):
        queue = self.queues[copy]
        while queue[0][0] != SERVES:
            self._take(copy)
        self._take(copy)


def _first(units: list[tuple[str, int]], kind: str) -> int:
    return next((i for i, (k, _) in enumerate(units) if k == kind), len(units))


def _check_phases(decomposition: PhaseDecomposition):
    for phase in decomposition.phases:
        if not phase.within_bound:
            raise NotBalanced(
                f"phase {phase.start}..{phase.end} repeats {phase.kappa} reconfigurations"
            )
        logger.debug(
            "%s phase %d..%d with %d repeated steps", phase.sign, phase.start, phase.end, phase.kappa
        )


def balanced_to_constrained_k1(e: Execution, copies: Optional[int] = None) -> Execution:
    """
    Turns a 1-balanced execution into a 1-constrained one on ``copies``
    copies of its start.

    The execution is first split into single-link steps. Each single-link
    step that follows another one gets a communication of a different copy
    just before it, following the numbering of repeated steps phase by
    phase, see :class:`CopySchedule`.

    :param e: 1-balanced execution; a leading or trailing reconfiguration
        is trimmed first
    :type e: Execution
    :param copies: Number of copies, by default the smallest one allowed
    :type copies: Optional[int]
    :return: 1-constrained execution from ``copies`` copies of the start to
        ``copies`` copies of the end
    :rtype: Execution
    :raises NotBalanced: when ``e`` reconfigures more links than it communicates
    :raises InsufficientCopies: when ``copies`` is below ``kappa**2 + kappa``
    """
    e = trim_to_communications(e)
    report = validate_execution(e, ConstraintPolicy(regime=KBalanced(k=1)))
    if not report.passed:
        raise NotBalanced(report.first_violation.detail)
    e = with_outcomes(e)
    word = atomic_word(e)
    letters = word_letters(word)
    decomposition = decompose_phases(letters, 1)
    _check_phases(decomposition)
    kappa = decomposition.kappa
    needed = required_copies(kappa)
    if copies is None:
        copies = max(needed, 1)
    if copies < needed:
        raise InsufficientCopies(f"{copies} copies given, {needed} needed for kappa={kappa}")
    if copies < 1:
        raise InsufficientCopies("at least one copy is needed")
    logger.info("interleaving %d copies of a %d-letter word, kappa=%d", copies, len(letters), kappa)

    n = e.initial.size
    builder = ExecutionBuilder(e.protocol, power(e.initial, copies))
    for copy, t in CopySchedule(letters, copies, kappa).build():
        atom = word[t]
        if isinstance(atom, Communication):
            builder.communicate(shift_step(atom, copy * n))
        else:
            u, v = atom
            builder.reconfigure([(u + copy * n, v + copy * n)])
    return builder.seal()
