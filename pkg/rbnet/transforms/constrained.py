import itertools
import logging
from math import comb

from rbnet.configuration import Edge, power
from rbnet.errors import ExecutionError
from rbnet.execution import (
    Communication,
    Execution,
    ExecutionBuilder,
    Reconfiguration,
    shift_step,
    trim_to_communications,
    with_outcomes,
)

logger = logging.getLogger("rbnet.transforms")


def _rounds(e: Execution) -> tuple[list[Communication], list[frozenset[Edge]]]:
    """Communications of ``e`` and the toggles following each of them."""
    comms: list[Communication] = []
    changes: list[frozenset[Edge]] = []
    for step in e.steps:
        if isinstance(step, Communication):
            comms.append(step)
            changes.append(frozenset())
        else:
            changes[-1] = step.toggled()
    return comms, changes


def _shift_edges(edges, offset: int) -> frozenset[Edge]:
    return frozenset((u + offset, v + offset) for u, v in edges)


def _padding(n: int, copies: int, pair: tuple[int, int], count: int) -> frozenset[Edge]:
    """First ``count`` links among the nodes of copies outside ``pair``."""
    if count <= 0:
        return frozenset()
    others = [v for c in range(copies) if c not in pair for v in range(c * n, (c + 1) * n)]
    return frozenset(itertools.islice(itertools.combinations(others, 2), count))


def paired_copies(e: Execution, copies: int, k: int) -> Execution:
    """
    Runs ``copies`` (even) copies of ``e`` grouped in pairs. Within a pair the
    first copy replays a communication, then a step applies its link changes
    together with enough padding links elsewhere to change exactly ``k``
    links; the second copy replays the same communication and the next step
    applies its own changes and flips the padding back.

    Padding links sit in copies that are idle for the whole exchange, so
    every copy sees its own topology whenever it communicates. The final
    communication of each pair is followed by a padding flip and its
    reversal, so the run ends with a reconfiguration.

    :param e: Execution whose reconfigurations change at most ``k`` links;
        a leading or trailing reconfiguration is trimmed first
    :param copies: Even number of copies, at least 4 when padding is needed
    :param k: Number of links changed by every reconfiguration
    :return: Execution from ``copies`` copies of the start to ``copies``
        copies of the end
    :rtype: Execution
    """
    if copies % 2:
        raise ValueError("copies come in pairs")
    e = with_outcomes(trim_to_communications(e))
    comms, changes = _rounds(e)
    if any(len(c) > k for c in changes):
        raise ExecutionError(f"a reconfiguration changes more than {k} links")
    n = e.initial.size
    builder = ExecutionBuilder(e.protocol, power(e.initial, copies))
    for comm, toggles in zip(comms, changes):
        for a in range(0, copies, 2):
            b = a + 1
            pad = _padding(n, copies, (a, b), k - len(toggles))
            builder.communicate(shift_step(comm, a * n))
            builder.reconfigure(_shift_edges(toggles, a * n) | pad)
            builder.communicate(shift_step(comm, b * n))
            builder.reconfigure(_shift_edges(toggles, b * n) | pad)
    return builder.seal()


def _enough_copies(n: int, k: int, minimum: int) -> int:
    """Smallest even count from ``minimum`` on leaving room for ``k`` padding links."""
    if n < 1:
        raise ExecutionError("an empty network cannot be padded")
    copies = minimum
    while comb((copies - 2) * n, 2) < k:
        copies += 2
    return copies


def lift_one_to_k(e: Execution, k: int) -> Execution:
    """
    Turns a 1-constrained execution into one whose reconfigurations all
    change exactly ``k`` links, on the smallest even number of copies that
    is at least ``k + 2``.
    """
    if k < 1:
        raise ValueError("k must be positive")
    copies = _enough_copies(e.initial.size, k, k + 2 + (k % 2))
    logger.info("lifting to strongly %d-constrained with %d copies", k, copies)
    return paired_copies(e, copies, k)


def weak_to_strong(e: Execution, k: int) -> Execution:
    """
    Turns a ``k``-constrained execution into a strongly ``k``-constrained
    one. An execution whose reconfigurations already all change ``k`` links
    is returned as it is.
    """
    if k < 1:
        raise ValueError("k must be positive")
    reconfigurations = [s for s in e.steps if isinstance(s, Reconfiguration)]
    if reconfigurations and all(s.size == k for s in reconfigurations):
        return e
    copies = _enough_copies(e.initial.size, k, 4)
    logger.info("strongly %d-constrained rewrite with %d copies", k, copies)
    return paired_copies(e, copies, k)
