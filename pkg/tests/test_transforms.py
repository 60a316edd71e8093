from collections import Counter

import pytest

from rbnet.configuration import Configuration
from rbnet.errors import (
    ExecutionError,
    InsufficientCopies,
    NotBalanced,
    NotDiverging,
)
from rbnet.execution import Communication, Execution, Reconfiguration, replay
from rbnet.policy import parse_bounding_function, parse_policy
from rbnet.protocol import BroadcastProtocol
from rbnet.transforms import (
    CopySchedule,
    balanced_to_constrained_k1,
    copies_for,
    lift_one_to_k,
    paired_copies,
    required_copies,
    to_f_constrained,
    to_id_constrained,
    to_one_locally_constrained,
    weak_to_strong,
    word_units,
)
from rbnet.validate import validate_execution


def final_counts(e: Execution) -> Counter:
    return replay(e)[-1].label_counts()


def scaled(e: Execution, copies: int) -> Counter:
    return Counter({s: c * copies for s, c in final_counts(e).items()})


class TestIdConstrained:
    def test_threeway_run(self, threeway_run: Execution):
        out = to_id_constrained(threeway_run)
        assert out.initial == threeway_run.initial
        assert [s.size for s in out.steps if s.kind == "reconf"] == [2, 1, 1]
        assert validate_execution(out, parse_policy("f=id")).passed
        assert replay(out)[-1].labels == ("q4", "q6", "q8")

    def test_empty_execution(self, threeway_run: Execution):
        empty = threeway_run.model_copy(update={"steps": ()})
        assert to_id_constrained(empty) is empty


class TestFConstrained:
    @pytest.mark.parametrize("name, copies", [("id", 1), ("sqrt", 3), ("log2", 3), ("linear:1,0", 1)])
    def test_copies_for(self, name: str, copies: int):
        assert copies_for(parse_bounding_function(name), 3) == copies

    def test_bounded_function(self):
        with pytest.raises(NotDiverging):
            copies_for(parse_bounding_function("constant:2"), 3)

    def test_sqrt(self, threeway_run: Execution):
        out = to_f_constrained(threeway_run, parse_bounding_function("sqrt"))
        assert out.initial.size == 9
        assert validate_execution(out, parse_policy("f=sqrt")).passed
        assert final_counts(out) == scaled(threeway_run, 3)


class TestOneLocallyConstrained:
    def test_threeway_run(self, threeway_run: Execution):
        out = to_one_locally_constrained(threeway_run)
        assert out.initial.size == 6
        assert out.comm_bounded
        assert validate_execution(out, parse_policy("local=1")).passed
        assert final_counts(out) == scaled(threeway_run, 2)

    def test_already_local(self, relay_run: Execution):
        out = to_one_locally_constrained(relay_run)
        assert out.initial.size == 3
        assert validate_execution(out, parse_policy("local=1")).passed


class TestStronglyConstrained:
    def test_lift_to_two(self, relay_run: Execution):
        out = lift_one_to_k(relay_run, 2)
        assert out.initial.size == 12
        assert validate_execution(out, parse_policy("strong=2")).passed
        assert set(replay(out)[-1].labels) == {"done"}

    def test_lift_to_three_uses_an_even_count(self, relay_run: Execution):
        out = lift_one_to_k(relay_run, 3)
        assert out.initial.size == 18
        assert validate_execution(out, parse_policy("strong=3")).passed

    def test_weak_to_strong(self, threeway_run: Execution):
        out = weak_to_strong(threeway_run, 2)
        assert out.initial.size == 12
        assert validate_execution(out, parse_policy("strong=2")).passed
        assert final_counts(out) == scaled(threeway_run, 4)

    def test_weak_to_strong_keeps_strong_runs(self, relay_run: Execution):
        assert weak_to_strong(relay_run, 1) is relay_run

    def test_padding_needs_room(self, relay):
        single = Execution(
            protocol=relay,
            initial=Configuration.of(["i"]),
            steps=(Communication(broadcaster=0, message="go"),),
        )
        out = lift_one_to_k(single, 2)
        assert out.initial.size == 6
        assert validate_execution(out, parse_policy("strong=2")).passed

    def test_pairs_only(self, relay_run: Execution):
        with pytest.raises(ValueError):
            paired_copies(relay_run, 3, 1)

    def test_changes_above_k(self, threeway_run: Execution):
        with pytest.raises(ExecutionError):
            paired_copies(threeway_run, 4, 1)


class TestBalanced:
    def test_required_copies(self):
        assert [required_copies(k) for k in range(4)] == [0, 2, 6, 12]

    def test_word_units(self):
        assert word_units("CCAAC") == [("C", 0), ("X", 1), ("A", 3), ("C", 4)]
        assert word_units("CAAACCC") == [("X", 0), ("A", 2), ("A", 3), ("C", 4), ("C", 5), ("C", 6)]

    @pytest.mark.parametrize(
        "letters, kappa",
        [
            ("CCAAC", 1),
            ("CAACC", 1),
            ("CACCAAC", 1),
            ("CAAACCC", 2),
            ("CCAAACCCAAC", 3),
            ("CACACCAAACCAC", 2),
        ],
    )
    @pytest.mark.parametrize("extra", [0, 1, 3])
    def test_copy_schedule(self, letters: str, kappa: int, extra: int):
        copies = required_copies(kappa) + extra
        order = CopySchedule(letters, copies, kappa).build()
        merged = "".join(letters[t] for _, t in order)
        assert "AA" not in merged
        for c in range(copies):
            assert [t for copy, t in order if copy == c] == list(range(len(letters)))

    def test_copy_schedule_without_repeats(self):
        order = CopySchedule("CACAC", 2, 0).build()
        assert order == [(0, t) for t in range(5)] + [(1, t) for t in range(5)]

    def test_balanced_run(self, balanced_run: Execution):
        out = balanced_to_constrained_k1(balanced_run)
        assert out.initial.size == 6
        assert validate_execution(out, parse_policy("k=1")).passed
        assert final_counts(out) == scaled(balanced_run, 2)

    def test_more_copies_than_needed(self, balanced_run: Execution):
        out = balanced_to_constrained_k1(balanced_run, copies=3)
        assert out.initial.size == 9
        assert validate_execution(out, parse_policy("k=1")).passed

    def test_too_few_copies(self, balanced_run: Execution):
        with pytest.raises(InsufficientCopies):
            balanced_to_constrained_k1(balanced_run, copies=1)

    def test_not_balanced(self, threeway_run: Execution):
        with pytest.raises(NotBalanced):
            balanced_to_constrained_k1(threeway_run)

    def test_one_constrained_input_needs_one_copy(self, relay_run: Execution):
        out = balanced_to_constrained_k1(relay_run)
        assert out.initial.size == 3
        assert validate_execution(out, parse_policy("k=1")).passed


class TestRunsOpeningWithReconfiguration:
    @pytest.fixture
    def wrapped_run(self, relay: BroadcastProtocol) -> Execution:
        """Two relay nodes linked by a first reconfiguration and unlinked by a last one."""
        return Execution(
            protocol=relay,
            initial=Configuration.of(["i", "i"]),
            steps=(
                Reconfiguration(added=[(0, 1)]),
                Communication(broadcaster=0, message="go"),
                Reconfiguration(),
                Communication(broadcaster=0, message="ok"),
                Reconfiguration(removed=[(0, 1)]),
            ),
        )

    def test_source_is_two_constrained(self, wrapped_run: Execution):
        assert validate_execution(wrapped_run, parse_policy("k=2")).passed
        assert set(replay(wrapped_run)[-1].labels) == {"done"}

    @pytest.mark.parametrize(
        "transform, policy",
        [
            (lambda e: weak_to_strong(e, 2), "strong=2"),
            (lambda e: lift_one_to_k(e, 2), "strong=2"),
            (to_one_locally_constrained, "local=1"),
            (to_id_constrained, "f=id"),
            (lambda e: to_f_constrained(e, parse_bounding_function("sqrt")), "f=sqrt"),
            (balanced_to_constrained_k1, "k=1"),
        ],
    )
    def test_transforms(self, wrapped_run: Execution, transform, policy: str):
        out = transform(wrapped_run)
        assert validate_execution(out, parse_policy(policy)).passed
        assert set(replay(out)[-1].labels) == {"done"}
