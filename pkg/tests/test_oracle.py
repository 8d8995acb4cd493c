import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blicketlab.core import Config, InconsistencyError, Panel, threshold_decisions, Decision
from blicketlab.oracle import (
    FeasibleSet,
    filter_feasible,
    is_consistent,
    is_solved,
    oracle_belief,
    step_reward,
)

# Brute-force reference: plain-Python set logic over all 512 subsets.


def brute_force_feasible(panels, num_objects=9):
    out = []
    for bits in range(1 << num_objects):
        hyp = {i for i in range(num_objects) if bits >> i & 1}
        if all(bool(hyp & p.objects) == p.machine_on for p in panels):
            out.append(frozenset(hyp))
    return out


def brute_force_belief(panels, num_objects=9):
    feasible = brute_force_feasible(panels, num_objects)
    return [sum(i in h for h in feasible) / len(feasible) for i in range(num_objects)]


class TestIsConsistent:
    def test_shared_object_with_active_machine(self):
        assert is_consistent({1}, Panel(frozenset({0, 1}), True))

    def test_shared_object_with_inactive_machine(self):
        assert not is_consistent({1}, Panel(frozenset({1}), False))

    def test_vacuous_empty_hypothesis(self):
        assert is_consistent(set(), Panel(frozenset(), False))


class TestFilter:
    def test_single_off_panel_halves_the_space(self):
        fs = FeasibleSet.full(9).filtered(Panel(frozenset({0}), False))
        assert len(fs) == 256
        assert all(0 not in h for h in fs.assignments())

    def test_on_then_off(self):
        fs = FeasibleSet.full(9)
        fs = fs.filtered(Panel(frozenset({0, 1}), True))
        fs = fs.filtered(Panel(frozenset({0}), False))
        hyps = fs.assignments()
        assert len(hyps) == 128
        assert all(0 not in h and 1 in h for h in hyps)

    def test_idempotent(self):
        panel = Panel(frozenset({0, 3}), True)
        once = FeasibleSet.full(9).filtered(panel)
        twice = once.filtered(panel)
        assert sorted(once.masks.tolist()) == sorted(twice.masks.tolist())

    def test_filter_feasible_alias(self):
        panel = Panel(frozenset({2}), False)
        a = filter_feasible(FeasibleSet.full(9), panel)
        assert a.masks.tolist() == FeasibleSet.full(9).filtered(panel).masks.tolist()

    def test_inconsistent_panel_raises(self):
        fs = FeasibleSet.full(9).filtered(Panel(frozenset({0}), True))
        with pytest.raises(InconsistencyError):
            fs.filtered(Panel(frozenset({0}), False))

    def test_monotone_and_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            truth = set(map(int, rng.choice(9, size=int(rng.integers(1, 9)), replace=False)))
            panels = []
            fs = FeasibleSet.full(9)
            previous = len(fs)
            for _ in range(6):
                subset = frozenset(
                    int(i) for i in np.nonzero(rng.random(9) < 0.5)[0]
                )
                panel = Panel(subset, bool(subset & truth))
                panels.append(panel)
                fs = fs.filtered(panel)
                assert len(fs) <= previous
                previous = len(fs)
                assert sorted(fs.assignments()) == sorted(brute_force_feasible(panels))
                assert fs.contains(truth)


class TestOracleBelief:
    def test_no_observations_is_all_half(self):
        assert oracle_belief(FeasibleSet.full(9)).tolist() == [0.5] * 9

    def test_derived_128_hypothesis_set(self):
        fs = FeasibleSet.full(9)
        fs = fs.filtered(Panel(frozenset({0, 1}), True))
        fs = fs.filtered(Panel(frozenset({0}), False))
        assert oracle_belief(fs).tolist() == [0.0, 1.0] + [0.5] * 7

    def test_single_activated_singleton(self):
        fs = FeasibleSet.full(9).filtered(Panel(frozenset({0}), True))
        assert len(fs) == 256
        assert oracle_belief(fs).tolist() == [1.0] + [0.5] * 8

    def test_cardinality_prior_restriction(self):
        # Reference by plain enumeration over subsets of size 3..8.
        hyps = [
            set(c)
            for k in range(3, 9)
            for c in itertools.combinations(range(9), k)
        ]
        expected = sum(0 in h for h in hyps) / len(hyps)
        probs = oracle_belief(FeasibleSet.full(9), use_cardinality_prior=True)
        assert probs[0] == pytest.approx(expected)
        assert np.allclose(probs, probs[0])

    def test_cardinality_prior_can_empty_the_set(self):
        fs = FeasibleSet.full(9)
        for i in range(8):
            fs = fs.filtered(Panel(frozenset({i}), False))
        # only {} and {8} remain; neither has cardinality in [3, 8]
        with pytest.raises(InconsistencyError):
            oracle_belief(fs, use_cardinality_prior=True)

    def test_matches_brute_force_belief(self):
        rng = np.random.default_rng(5)
        truth = {1, 4, 7}
        panels = []
        fs = FeasibleSet.full(9)
        for _ in range(5):
            subset = frozenset(int(i) for i in np.nonzero(rng.random(9) < 0.4)[0])
            panel = Panel(subset, bool(subset & truth))
            panels.append(panel)
            fs = fs.filtered(panel)
            assert oracle_belief(fs).tolist() == pytest.approx(brute_force_belief(panels))


class TestIsSolved:
    def test_correct_with_margins(self):
        belief = [0.9, 0.9, 0.9, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]
        assert is_solved(belief, {0, 1, 2})

    def test_exact_half_never_solves(self):
        belief = [0.9, 0.9, 0.9, 0.1, 0.1, 0.1, 0.1, 0.1, 0.5]
        assert not is_solved(belief, {0, 1, 2})

    def test_oracle_belief_of_singleton_feasible_set_solves(self):
        truth = frozenset({2, 5, 6})
        fs = FeasibleSet.full(9)
        for i in range(9):
            fs = fs.filtered(Panel(frozenset({i}), i in truth))
        assert len(fs) == 1
        assert is_solved(oracle_belief(fs), truth)

    def test_wrong_assignment(self):
        assert not is_solved([1.0] * 3 + [0.0] * 6, {0, 1})

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=9, max_size=9))
    def test_agrees_with_threshold_decisions(self, belief):
        truth = {0, 3, 4}
        decisions = threshold_decisions(belief)
        expected = all(
            (decisions[i] is Decision.BLICKET) == (i in truth)
            and decisions[i] is not Decision.UNDECIDED
            for i in range(9)
        )
        assert is_solved(belief, truth) == expected


class TestStepReward:
    def test_solved_is_exactly_the_bonus(self):
        assert step_reward(True, [0.5] * 9, [0.5] * 9) == 20.0

    def test_unsolved_with_matching_belief(self):
        oracle = [0.0, 1.0] + [0.5] * 7
        assert step_reward(False, oracle, oracle) == -1.0

    def test_unsolved_with_complement_of_binary_oracle(self):
        oracle = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]
        belief = [1.0 - x for x in oracle]
        assert step_reward(False, belief, oracle) == pytest.approx(-2.0)

    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=9, max_size=9),
        st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=9, max_size=9),
    )
    def test_unsolved_range(self, belief, oracle):
        r = step_reward(False, belief, oracle)
        assert -2.0 <= r <= -1.0

    def test_respects_config(self):
        cfg = Config(solve_bonus=7.0, step_penalty=-0.25)
        assert step_reward(True, [0.5] * 9, [0.5] * 9, cfg) == 7.0
        assert step_reward(False, [0.5] * 9, [0.5] * 9, cfg) == -0.25
