"""Seeded sweeps over random protocols and traces; deselect with ``-m "not slow"``."""

import logging
from collections import Counter

import pytest

from rbnet.abstraction import abstract_search
from rbnet.consts import DEFAULT_BUDGET_DEPTH
from rbnet.corpus import protocol_corpus
from rbnet.execution import Execution, Reconfiguration, replay, trim_to_communications
from rbnet.policy import parse_bounding_function, parse_policy
from rbnet.reductions import Reached, bounded_marking_reachability, compile_to_petri, dead_places
from rbnet.saturation import decide_synchronization_unconstrained
from rbnet.search import SearchBudget, search_synchronizing_execution
from rbnet.transforms import (
    balanced_to_constrained_k1,
    lift_one_to_k,
    to_f_constrained,
    to_id_constrained,
    to_one_locally_constrained,
    weak_to_strong,
)
from rbnet.validate import validate_execution

logger = logging.getLogger("rbnet.tests")

BUDGET = SearchBudget(max_states=100_000)


def final_counts(e: Execution) -> Counter:
    return replay(e)[-1].label_counts()


def seeded_nodes(sequence: list[str]) -> int:
    """Nodes put in by the seeding transitions of a compiled net's firing sequence."""
    return sum(
        len(name.split("_")) - 1 for name in sequence if name.startswith(("init_", "seed_"))
    )


@pytest.mark.slow
class TestOneConstrainedImpossibility:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_exhausted(self, threeway, n: int):
        r = search_synchronizing_execution(threeway, n, parse_policy("k=1"))
        assert r.verdict == "exhausted"


@pytest.mark.slow
class TestSaturationAgainstCounters:
    def test_corpus(self):
        violations = agree = conclusive = 0
        for proto in protocol_corpus(7, 500, max_states=6, max_messages=3):
            holds = decide_synchronization_unconstrained(proto).holds
            verdicts = [abstract_search(proto, n, BUDGET.max_states, DEFAULT_BUDGET_DEPTH)[0] for n in range(1, 6)]
            found = "found" in verdicts
            if found and not holds:
                violations += 1
                logger.warning("counter witness without a saturation verdict")
            if not found and "budget_exceeded" in verdicts:
                continue
            if holds and not found:
                # a larger network may be needed
                found = any(
                    abstract_search(proto, n, BUDGET.max_states, DEFAULT_BUDGET_DEPTH)[0] == "found"
                    for n in range(6, 9)
                )
                if not found:
                    logger.info("no counter witness up to 8 nodes")
            conclusive += 1
            agree += found == holds
        assert violations == 0
        assert conclusive
        assert agree / conclusive >= 0.95


def trace_corpus(size: int) -> list[Execution]:
    traces = []
    for proto in protocol_corpus(11, 2000, max_states=5, max_messages=2):
        for n in range(1, 4):
            r = search_synchronizing_execution(proto, n, parse_policy("unconstrained"), budget=BUDGET)
            if r.found:
                if r.witness.communications:
                    traces.append(r.witness)
                break
        if len(traces) == size:
            break
    return traces


@pytest.mark.slow
class TestTransformCorpus:
    @pytest.fixture(scope="class")
    def traces(self) -> list[Execution]:
        return trace_corpus(50)

    def check(self, source: Execution, out: Execution, policy: str):
        n = source.initial.size
        assert validate_execution(out, parse_policy(policy)).passed
        assert out.initial.size % n == 0
        factor = out.initial.size // n
        assert final_counts(out) == Counter({s: c * factor for s, c in final_counts(source).items()})
        assert source.protocol.is_target(replay(out)[-1].labels)

    def test_corpus_size(self, traces: list[Execution]):
        assert len(traces) == 50

    def test_unconstrained_transforms(self, traces: list[Execution]):
        for e in traces:
            source = trim_to_communications(e)
            self.check(source, to_id_constrained(e), "f=id")
            self.check(source, to_f_constrained(e, parse_bounding_function("sqrt")), "f=sqrt")
            self.check(source, to_one_locally_constrained(e), "local=1")
            k = max([1] + [s.size for s in source.steps if isinstance(s, Reconfiguration)])
            self.check(source, weak_to_strong(source, k), f"strong={k}")

    def test_constrained_transforms(self, traces: list[Execution]):
        lifted = balanced = 0
        for e in traces:
            source = trim_to_communications(e)
            if validate_execution(source, parse_policy("k=1")).passed:
                self.check(source, lift_one_to_k(source, 2), "strong=2")
                lifted += 1
            if validate_execution(source, parse_policy("balanced=1")).passed:
                out = balanced_to_constrained_k1(source)
                self.check(source, out, "k=1")
                self.check(source, lift_one_to_k(out, 2), "strong=2")
                balanced += 1
        assert lifted and balanced


@pytest.mark.slow
class TestConstrainedAgainstBalanced:
    @pytest.fixture(scope="class")
    def protocols(self):
        return list(protocol_corpus(23, 100, max_states=5, max_messages=2))

    @pytest.mark.parametrize("k", [1, 2])
    def test_constrained_witness_is_balanced(self, protocols, k: int):
        for proto in protocols:
            for n in range(1, 5):
                r = search_synchronizing_execution(proto, n, parse_policy(f"k={k}"), budget=BUDGET)
                if r.verdict != "found":
                    continue
                assert validate_execution(trim_to_communications(r.witness), parse_policy(f"balanced={k}")).passed
                b = search_synchronizing_execution(proto, n, parse_policy(f"balanced={k}"), budget=BUDGET)
                assert b.verdict != "exhausted"
                break

    def test_balanced_witness_yields_constrained(self, protocols):
        for proto in protocols:
            for n in range(1, 5):
                b = search_synchronizing_execution(proto, n, parse_policy("balanced=1"), budget=BUDGET)
                if b.verdict != "found":
                    continue
                out = balanced_to_constrained_k1(b.witness)
                assert validate_execution(out, parse_policy("k=1")).passed
                assert proto.is_target(replay(out)[-1].labels)
                break


@pytest.mark.slow
class TestPetriAgainstSearch:
    @pytest.mark.parametrize("k", [1, 2])
    def test_corpus(self, k: int):
        policy = parse_policy(f"k={k}", degree_bound=1)
        for proto in protocol_corpus(31, 25, max_states=4, max_messages=2):
            net = compile_to_petri(proto, k)
            q = len(proto.states)
            assert len(net.places) == q + q * (q + 1) // 2 + k + 4
            verdict = bounded_marking_reachability(net, 6, dead_places(proto, net), max_markings=100_000)
            if isinstance(verdict, Reached):
                nodes = seeded_nodes(verdict.sequence)
                if nodes <= 5:
                    r = search_synchronizing_execution(proto, nodes, policy, budget=BUDGET)
                    assert r.verdict != "exhausted"
            elif verdict.complete:
                for n in range(1, 5):
                    r = search_synchronizing_execution(proto, n, policy, budget=BUDGET)
                    assert not r.found
