import logging
from collections import deque

from rbnet.configuration import norm_edge, power
from rbnet.errors import NotDiverging
from rbnet.execution import (
    Communication,
    Execution,
    ExecutionBuilder,
    Reconfiguration,
    replay,
    shift_step,
    shuffle,
    trim_to_communications,
    with_outcomes,
)
from rbnet.policy import BoundingFunction

logger = logging.getLogger("rbnet.transforms")

# scanning for the number of copies gives up past this many
MAX_COPIES = 1 << 20


def to_id_constrained(e: Execution) -> Execution:
    """
    Rewires only the broadcaster before each communication so that its
    neighbours are exactly the receivers of the original step; every other
    reconfiguration is dropped. Each step then changes at most ``n - 1``
    links.

    :param e: Well-formed execution
    :type e: Execution
    :return: Execution on the same nodes ending in the same labels
    :rtype: Execution
    """
    if not e.steps:
        return e
    configurations = replay(e)
    e = with_outcomes(e, configurations)
    builder = ExecutionBuilder(e.protocol, e.initial)
    for i, step in enumerate(e.steps):
        if isinstance(step, Reconfiguration):
            continue
        b = step.broadcaster
        wanted = {norm_edge(b, v) for v in configurations[i].neighbours(b)}
        current = {edge for edge in builder.edges if b in edge}
        builder.reconfigure(current ^ wanted)
        builder.communicate(step)
    return builder.seal(keep_last_reconfiguration=False)


def copies_for(f: BoundingFunction, n: int) -> int:
    """Smallest ``k`` with ``f(k * n) >= n``."""
    if not f.diverging:
        raise NotDiverging(f"{f} does not diverge")
    k = 1
    while f(k * n) < n:
        k += 1
        if k > MAX_COPIES:
            raise NotDiverging(f"{f} stays below {n} up to {MAX_COPIES} copies")
    return k


def to_f_constrained(e: Execution, f: BoundingFunction) -> Execution:
    """
    Runs ``k`` copies of :func:`to_id_constrained` one after the other, with
    ``k`` the smallest number of copies for which ``f`` allows rewiring a
    whole copy in one step.

    :raises NotDiverging: for constant (or otherwise bounded) functions
    """
    k = copies_for(f, e.initial.size)
    base = to_id_constrained(e)
    result = base
    for _ in range(k - 1):
        result = shuffle(result, base)
    logger.info("f-constrained rewrite with %d copies of %d nodes", k, e.initial.size)
    return result


def to_one_locally_constrained(e: Execution) -> Execution:
    """
    Runs ``r`` staggered copies, ``r`` being the largest reconfiguration of
    ``e``. Copies communicate in round robin; in the ``r`` reconfiguration
    slots between two communications of a copy, the copy applies its pending
    link changes one at a time, so no node ever sees two changes in a step.

    :param e: Execution; a leading reconfiguration is folded into the
        initial topology and a trailing one dropped
    :type e: Execution
    :return: Execution from ``r`` copies of the start to ``r`` copies of the end
    :rtype: Execution
    """
    e = with_outcomes(trim_to_communications(e))
    comms: list[Communication] = []
    changes: list[list] = []
    for step in e.steps:
        if isinstance(step, Communication):
            comms.append(step)
            changes.append([])
        else:
            changes[-1] = sorted(step.toggled())
    r = max([1] + [len(c) for c in changes])
    n = e.initial.size
    builder = ExecutionBuilder(e.protocol, power(e.initial, r))
    queues = [deque() for _ in range(r)]
    for i, comm in enumerate(comms):
        for copy in range(r):
            assert not queues[copy], "copy communicates with link changes pending"
            builder.communicate(shift_step(comm, copy * n))
            offset = copy * n
            queues[copy].extend((u + offset, v + offset) for u, v in changes[i])
            slot = [q.popleft() for q in queues if q]
            builder.reconfigure(slot)
    return builder.seal(keep_last_reconfiguration=False)
