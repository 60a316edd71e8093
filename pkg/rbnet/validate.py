from typing import Literal, Optional

from pydantic import BaseModel

from rbnet.configuration import Configuration
from rbnet.execution import (
    Communication,
    Execution,
    Reconfiguration,
    atomic_word,
    replay,
    word_letters,
)
from rbnet.policy import (
    ConstraintPolicy,
    FConstrained,
    KBalanced,
    KConstrained,
    KLocallyConstrained,
    StronglyKConstrained,
)
from rbnet.topology import check_topology


class ConstraintCheck(BaseModel):
    """
    Verdict for one constraint.

    ``index`` is a step index for regime checks and a configuration index
    (0 is the initial configuration) for topology checks.
    """

    name: str
    passed: bool
    index: Optional[int] = None
    detail: str = ""


class BalanceCount(BaseModel):
    communications: int
    reconfigured: int


class ValidationReport(BaseModel):
    policy: str
    checks: list[ConstraintCheck]
    balance: Optional[BalanceCount] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_violation(self) -> Optional[ConstraintCheck]:
        """Failed check with the lowest index; checks without an index come last."""
        failed = [c for c in self.checks if not c.passed]
        return min(failed, key=lambda c: (c.index is None, c.index or 0)) if failed else None


def _per_step(e: Execution, name: str, fits) -> ConstraintCheck:
    for i, step in enumerate(e.steps):
        if isinstance(step, Reconfiguration) and not fits(step):
            return ConstraintCheck(
                name=name, passed=False, index=i, detail=f"step {i} changes {step.size} links"
            )
    return ConstraintCheck(name=name, passed=True)


def _locally(e: Execution, k: int) -> ConstraintCheck:
    name = f"{k}-locally-constrained"
    for i, step in enumerate(e.steps):
        if not isinstance(step, Reconfiguration):
            continue
        touched: dict[int, int] = {}
        for u, v in step.toggled():
            touched[u] = touched.get(u, 0) + 1
            touched[v] = touched.get(v, 0) + 1
        worst = max(touched.items(), key=lambda kv: (kv[1], -kv[0]), default=None)
        if worst is not None and worst[1] > k:
            return ConstraintCheck(
                name=name,
                passed=False,
                index=i,
                detail=f"node {worst[0]} has {worst[1]} changed links at step {i}",
            )
    return ConstraintCheck(name=name, passed=True)


def _balanced(e: Execution, k: int) -> tuple[ConstraintCheck, BalanceCount]:
    name = f"{k}-balanced"
    count = BalanceCount(communications=e.communications, reconfigured=e.reconfigured)
    if not e.steps:
        return ConstraintCheck(name=name, passed=True), count
    if not isinstance(e.steps[0], Communication):
        return ConstraintCheck(name=name, passed=False, index=0, detail="starts with a reconfiguration"), count
    last = len(e.steps) - 1
    if not isinstance(e.steps[-1], Communication):
        return ConstraintCheck(name=name, passed=False, index=last, detail="ends with a reconfiguration"), count
    allowed = k * (count.communications - 1)
    if count.reconfigured > allowed:
        return (
            ConstraintCheck(
                name=name,
                passed=False,
                index=last,
                detail=f"{count.reconfigured} links reconfigured, at most {allowed} allowed",
            ),
            count,
        )
    return ConstraintCheck(name=name, passed=True), count


def _topology(configurations: list[Configuration], policy: ConstraintPolicy) -> list[ConstraintCheck]:
    checks = []
    if policy.degree_bound is not None:
        checks.append(ConstraintCheck(name=f"degree<={policy.degree_bound}", passed=True))
    if policy.path_bound is not None:
        checks.append(ConstraintCheck(name=f"path<={policy.path_bound}", passed=True))
    if not checks:
        return checks
    degree_seen = path_seen = False
    for i, g in enumerate(configurations):
        report = check_topology(g, policy.degree_bound, policy.path_bound)
        if not report.degree_ok and not degree_seen:
            degree_seen = True
            checks[0] = ConstraintCheck(
                name=checks[0].name, passed=False, index=i, detail=f"max degree {report.max_degree}"
            )
        if not report.path_ok and not path_seen:
            path_seen = True
            checks[-1] = ConstraintCheck(
                name=checks[-1].name,
                passed=False,
                index=i,
                detail=f"simple path of length {report.longest_path}",
            )
    return checks


def validate_execution(e: Execution, policy: ConstraintPolicy) -> ValidationReport:
    """
    Checks an execution against a regime and topology bounds.

    Failures are reported, not raised.

    :param e: Well-formed execution (it is replayed to get the topologies)
    :type e: Execution
    :param policy: Regime and bounds to check
    :type policy: ConstraintPolicy
    :return: One entry per active constraint, with the first violating index
    :rtype: ValidationReport
    """
    configurations = replay(e)
    regime = policy.regime
    checks: list[ConstraintCheck] = []
    balance = None
    if isinstance(regime, KConstrained):
        checks.append(_per_step(e, f"{regime.k}-constrained", lambda s: s.size <= regime.k))
    elif isinstance(regime, StronglyKConstrained):
        checks.append(_per_step(e, f"strongly {regime.k}-constrained", lambda s: s.size == regime.k))
    elif isinstance(regime, FConstrained):
        budget = regime.f(e.initial.size)
        checks.append(_per_step(e, f"{regime.f}-constrained", lambda s: s.size <= budget))
    elif isinstance(regime, KLocallyConstrained):
        checks.append(_locally(e, regime.k))
    elif isinstance(regime, KBalanced):
        check, balance = _balanced(e, regime.k)
        checks.append(check)
    checks.extend(_topology(configurations, policy))
    return ValidationReport(policy=str(policy), checks=checks, balance=balance)


class Phase(BaseModel):
    start: int
    end: int
    sign: Literal["nonneg", "nonpos"]
    kappa: int
    within_bound: bool


class PhaseDecomposition(BaseModel):
    """
    Split of the atomic word (each reconfiguration of size ``d`` counted as
    ``d`` single-link steps) into maximal segments of constant potential sign.

    Phase boundaries are indices into :attr:`potentials`; the last letter is
    not covered.
    """

    word: str
    potentials: list[int]
    phases: list[Phase]

    @property
    def kappa(self) -> int:
        return sum(p.kappa for p in self.phases)


class PotentialReport(BaseModel):
    values: list[int]
    decomposition: PhaseDecomposition

    @property
    def kappa(self) -> int:
        return self.decomposition.kappa


def repeated_reconfigurations(letters: str) -> list[int]:
    """Positions of single-link steps that immediately follow another one."""
    return [t for t in range(1, len(letters)) if letters[t] == "A" and letters[t - 1] == "A"]


def decompose_phases(letters: str, k: int) -> PhaseDecomposition:
    potentials = [0]
    for letter in letters:
        potentials.append(potentials[-1] + (k if letter == "C" else -1))
    last = len(letters) - 1
    repeated = set(repeated_reconfigurations(letters))
    phases = []
    start, sign, last_zero = 0, 0, 0
    for i in range(1, last + 1):
        p = potentials[i]
        if p == 0:
            last_zero = i
            continue
        s = 1 if p > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            end = last_zero if last_zero > start else i - 1
            phases.append((start, end, sign))
            start, sign = end, s
    if last >= 0:
        phases.append((start, max(last, start), sign or 1))
    result = []
    for b, e_, s in phases:
        kappa = sum(1 for t in repeated if b <= t < e_)
        result.append(
            Phase(
                start=b,
                end=e_,
                sign="nonneg" if s > 0 else "nonpos",
                kappa=kappa,
                within_bound=2 * kappa <= e_ - b,
            )
        )
    return PhaseDecomposition(word=letters, potentials=potentials, phases=result)


def potential_sequence(e: Execution, k: int) -> PotentialReport:
    """
    Running value of ``k * communications - reconfigured links``.

    :param e: Execution starting and ending with a communication
    :type e: Execution
    :param k: Credit earned by each communication
    :type k: int
    :return: One value per configuration, and the phase decomposition of
        the atomic word
    :rtype: PotentialReport
    :raises NotCommBounded: when ``e`` does not start and end with a
        communication step
    """
    e.require_comm_bounded()
    values = [0]
    for step in e.steps:
        values.append(values[-1] + (k if isinstance(step, Communication) else -step.size))
    return PotentialReport(values=values, decomposition=decompose_phases(word_letters(atomic_word(e)), k))
