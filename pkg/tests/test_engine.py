import pytest

from rbnet.configuration import Configuration
from rbnet.engine import enabled_communications, successor_reconfigurations
from rbnet.errors import BudgetUnbounded
from rbnet.execution import Execution
from rbnet.policy import ConstraintPolicy, parse_policy


class TestEnabledCommunications:
    def test_one_step_per_transition_choice(self, threeway_run: Execution):
        steps = enabled_communications(threeway_run.protocol, threeway_run.initial)
        assert len(steps) == 8
        assert [s.broadcaster for s in steps] == [0] * 4 + [1] * 2 + [2] * 2
        assert steps[0].outcome == ((0, "q1"), (1, "q5"), (2, "q5"))

    def test_isolated_broadcaster_is_always_enabled(self, lonely):
        steps = enabled_communications(lonely, Configuration.of(["i", "i"]))
        assert [s.outcome for s in steps] == [((0, "x"),), ((1, "x"),)]

    def test_blocked_by_a_neighbour(self, lonely):
        assert enabled_communications(lonely, Configuration.of(["i", "i"], [(0, 1)])) == []


class TestSuccessorReconfigurations:
    @pytest.mark.parametrize(
        "policy, count",
        [("k=1", 4), ("strong=2", 3), ("local=1", 4), ("unconstrained", 8), ("f=id", 8)],
    )
    def test_counts_on_three_nodes(self, policy: str, count: int):
        steps = list(successor_reconfigurations(Configuration.of("abc"), parse_policy(policy)))
        assert len(steps) == count
        assert len({(s.added, s.removed) for s in steps}) == count

    def test_trivial_step_first(self):
        steps = successor_reconfigurations(Configuration.of("abc", [(0, 1)]), parse_policy("k=2"))
        assert next(steps).trivial

    def test_topology_bounds_filter_results(self):
        g = Configuration.of("abc", [(0, 1)])
        steps = list(successor_reconfigurations(g, parse_policy("k=1", degree_bound=1)))
        assert len(steps) == 2
        assert all(s.size <= 1 for s in steps)

    def test_unbounded_regime_on_large_networks(self):
        with pytest.raises(BudgetUnbounded):
            list(successor_reconfigurations(Configuration.of("abcdefg"), ConstraintPolicy()))
