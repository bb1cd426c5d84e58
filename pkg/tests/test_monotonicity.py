from __future__ import annotations

import dataclasses
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_walled_landscape
from trapwalk.errors import ValidationError
from trapwalk.exact_engine import expected_survival
from trapwalk.landscape import Landscape, insert_site
from trapwalk.monotonicity import (
    SearchExhausted,
    check_pair,
    compute_split_stats,
    crossing_probabilities,
    decompose_trajectory,
    family_landscape,
    find_counterexample,
    nonmono_condition_rhs,
    predicted_crossing_probabilities,
    predicted_plus_after_insert,
    recursive_pair,
    survival_via_split,
    trajectory_from_runs,
    verify_lemma52,
)

EXAMPLE_TRAJECTORY = trajectory_from_runs([0, 2, 1, 8, 4, 10, 3])


class TestSplitStats:
    def test_family_bounds(self):
        for I1 in range(1, 7):
            for I3 in range(1, 15):
                ls = family_landscape(I1, I3, 3)
                s = compute_split_stats(ls, 2)
                assert Fraction(1, 3) <= s.Pplus <= Fraction(2, 3)
                assert Fraction(1, 3) <= s.Pminus <= Fraction(2, 3)
                assert s.Eminus <= 2 * I1 + 1
                assert s.Eplus >= Fraction(I3 - 1, 3)

    def test_ranges(self, random_landscapes):
        for ls in random_landscapes:
            for k in range(1, ls.n_traps + 1):
                s = compute_split_stats(ls, k)
                assert 0 < s.P0 <= 1 and 0 < s.Pminus < 1 and 0 <= s.Pplus < 1
                assert min(s.E0, s.Eminus, s.Eplus) >= 0

    def test_errors(self):
        with pytest.raises(ValidationError, match="wall required"):
            compute_split_stats(Landscape((2, 3)), 1)
        with pytest.raises(ValidationError):
            compute_split_stats(Landscape((2, 3), 7), 4)


class TestSurvivalViaSplit:
    def test_matches_exact_engine(self, random_landscapes):
        for ls in random_landscapes:
            tau = expected_survival(ls).expected_tau
            for k in range(1, ls.n_traps + 1):
                assert survival_via_split(compute_split_stats(ls, k)) == tau

    def test_wall_adjacent_to_last_trap(self):
        ls = Landscape((2, 3), 6)
        s = compute_split_stats(ls, 3)
        assert (s.Pplus, s.Eplus) == (0, 0)
        assert survival_via_split(s) == expected_survival(ls).expected_tau

    def test_all_trap_segment(self):
        ls = Landscape((1,) * 8, 9)
        res = expected_survival(ls)
        for k in range(1, ls.n_traps + 1):
            assert survival_via_split(compute_split_stats(ls, k)) == 3 * (1 - res.wall_prob)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(1, 6), min_size=1, max_size=5), st.integers(1, 6), st.data())
    def test_property(self, intervals, gap, data):
        ls = Landscape(tuple(intervals), sum(intervals) + gap)
        k = data.draw(st.integers(1, ls.n_traps))
        assert survival_via_split(compute_split_stats(ls, k)) == expected_survival(ls).expected_tau


class TestInsertionIdentities:
    def test_family_instance(self):
        report = verify_lemma52(Landscape((4, 1, 6), 17), 2)
        assert report.holds, report.checks

    def test_half_goes_to_two_thirds(self):
        s = compute_split_stats(Landscape((4, 1, 6), 17), 2)
        s = dataclasses.replace(s, Pplus=Fraction(1, 2))
        assert predicted_plus_after_insert(s)[0] == Fraction(2, 3)

    def test_random_instances(self, random_landscapes):
        for ls in random_landscapes:
            for k in range(1, ls.n_intervals + 1):
                assert verify_lemma52(ls, k).holds

    def test_geometric_series_form(self):
        # 1/(2 - P) = (1/2) sum_n (P/2)^n, checked on a truncated exact sum
        s = compute_split_stats(Landscape((3, 2, 5), 14), 2)
        partial = sum(Fraction(1, 2) * (s.Pplus / 2) ** n for n in range(60))
        assert abs(predicted_plus_after_insert(s)[0] - partial) < Fraction(1, 10**17)

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            verify_lemma52(Landscape((2, 3), 7), 3)


class TestNonMonotonicity:
    def test_sign_matches_direct_difference(self, random_landscapes):
        for ls in random_landscapes:
            for k in range(1, ls.n_intervals + 1):
                s = compute_split_stats(ls, k)
                diff = expected_survival(insert_site(ls, k)).expected_tau - expected_survival(ls).expected_tau
                assert nonmono_condition_rhs(s) * s.P0 == diff

    def test_large_third_interval_is_negative(self):
        assert nonmono_condition_rhs(compute_split_stats(family_landscape(1, 40, 1), 2)) < 0

    def test_symmetric_tiny_instance_is_positive(self):
        assert nonmono_condition_rhs(compute_split_stats(Landscape((2, 2, 2), 7), 2)) > 0

    def test_find_counterexample(self):
        pair = find_counterexample(10, 60, [1, 2, 5])
        assert pair.tau_second < pair.tau_first
        assert pair.second == insert_site(pair.first, 2)
        assert pair.first.intervals[1] == 1
        assert pair.rhs < 0
        # frozen witness: the smallest in search order
        assert pair.first == Landscape((1, 1, 12), 15)
        assert (pair.tau_first, pair.tau_second) == (Fraction(1433, 289), Fraction(1965, 397))

    def test_exhausted(self):
        with pytest.raises(SearchExhausted) as info:
            find_counterexample(3, 1, [1])
        assert info.value.tried == 3

    def test_check_pair_json(self):
        doc = check_pair(family_landscape(1, 12, 1), 2).to_json()
        assert doc["difference"] == "-1016/114733"

    def test_recursive_pair(self):
        report = recursive_pair()
        assert report.dense.verdict == "infinite" and report.sparse.verdict == "finite"
        assert report.non_monotone


class TestTrajectories:
    def test_example_decomposition(self):
        d = decompose_trajectory(EXAMPLE_TRAJECTORY, Landscape((3, 4, 5)), 3)
        assert d.l_times == (9, 10, 11, 18, 23)
        assert d.T_segments == (9, 1, 1, 7, 5, 5)
        assert d.tau == 28

    def test_death_before_cut(self):
        d = decompose_trajectory([0, 1, 2, 3, "*"], Landscape((3, 4, 5)), 3)
        assert d.l_times == () and d.T_segments == (4,) and d.tau == 4

    def test_single_step_death(self):
        d = decompose_trajectory([0, "*"], Landscape((3,)), 1)
        assert d.tau == 1 and d.T_segments[0] == 0 and sum(d.T_segments) == 1
        d = decompose_trajectory([0, "*"], Landscape((3,)), 2)
        assert d.tau == 1 and d.T_segments == (1,)

    def test_wall_ending(self):
        d = decompose_trajectory([0, 1, 2, 3], Landscape((2,), 3), 2)
        assert d.ended_by == "wall" and d.tau == 3 and d.l_times == (2, 3)

    @pytest.mark.parametrize("traj", [[0, 2, "*"], [0, 1, "*"], [1, 0, "*"], [0, 1, 1, "*"], [0, "x"]])
    def test_illegal(self, traj):
        with pytest.raises(ValidationError):
            decompose_trajectory(traj, Landscape((3, 4, 5)), 2)

    def test_time_is_conserved_on_random_walks(self):
        rng = random.Random(9)
        for _ in range(300):
            ls = random_walled_landscape(rng, max_span=20)
            traps = set(ls.positions)
            traj, x = [0], 0
            while True:
                u = rng.random()
                if x in traps and u < 1 / 3:
                    traj.append("*")
                    break
                x = x + 1 if x == 0 or (x in traps and u > 2 / 3) or (x not in traps and u > 1 / 2) else x - 1
                traj.append(x)
                if x == ls.wall:
                    break
            k = rng.randint(1, ls.n_traps)
            d = decompose_trajectory(traj, ls, k)
            assert sum(d.T_segments) == d.tau
            assert list(d.l_times) == sorted(set(d.l_times))


class TestCrossingProbabilities:
    @pytest.mark.parametrize("intervals,wall,k", [((4, 1, 6), 17, 2), ((2, 3), 8, 2), ((3, 2, 2), 9, 3),
                                                  ((2, 2), 6, 1)])
    def test_product_form(self, intervals, wall, k):
        ls = Landscape(intervals, wall)
        s = compute_split_stats(ls, k)
        assert crossing_probabilities(ls, k, 9) == predicted_crossing_probabilities(s, 9)
