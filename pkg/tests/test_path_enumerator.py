from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from trapwalk import oracle
from trapwalk.errors import ValidationError
from trapwalk.landscape import Landscape, RecursionParams, generate_recursive
from trapwalk.path_enumerator import (
    contribution,
    enumerate_K,
    expected_Y_given_Aplus,
    formula_kappa_one,
    is_admissible,
    prob_A_kappa,
    verify_lemma41_bounds,
)

CRITICAL = generate_recursive(RecursionParams(1, Fraction(2), 7))
SUBCRITICAL = generate_recursive(RecursionParams(4, Fraction(1, 2), 7))


def brute_force_K(i):
    return {w for w in itertools.product((-1, 0, 1), repeat=i - 1)
            if all(sum(w[:j]) >= 0 for j in range(1, len(w) + 1))}


class TestEnumeration:
    def test_small_cases(self):
        assert list(enumerate_K(1)) == [()]
        assert set(enumerate_K(2)) == {(0,), (1,)}
        assert set(enumerate_K(3)) == {(0, 0), (0, 1), (1, -1), (1, 0), (1, 1)}

    def test_counts(self):
        # Motzkin prefix counts
        assert [sum(1 for _ in enumerate_K(i)) for i in range(1, 9)] == [1, 2, 5, 13, 35, 96, 267, 750]

    @pytest.mark.parametrize("i", range(1, 8))
    def test_matches_brute_force_filter(self, i):
        words = list(enumerate_K(i))
        assert len(words) == len(set(words))
        assert set(words) == brute_force_K(i)

    def test_prefix_shards_partition(self):
        shards = [set(enumerate_K(6, prefix)) for prefix in ((0,), (1,))]
        assert shards[0].isdisjoint(shards[1])
        assert shards[0] | shards[1] == set(enumerate_K(6))
        assert list(enumerate_K(4, (-1,))) == []

    def test_rejects_bad_i(self):
        with pytest.raises(ValidationError):
            list(enumerate_K(0))

    @given(st.lists(st.integers(-1, 1), max_size=10))
    def test_admissibility_predicate(self, word):
        assert is_admissible(word) == all(sum(word[:j]) >= 0 for j in range(len(word) + 1))


class TestProbabilities:
    def test_empty_history(self):
        assert prob_A_kappa(CRITICAL, ()) == 1

    def test_single_right_step(self):
        assert prob_A_kappa(Landscape((1, 2, 8)), (1,)) == Fraction(2, 3)

    def test_single_stay(self):
        assert prob_A_kappa(Landscape((3, 4)), (0,)) == Fraction(4, 9)

    def test_positive_when_first_interval_has_room(self):
        for kappa in itertools.chain.from_iterable(enumerate_K(i) for i in range(1, 7)):
            assert prob_A_kappa(SUBCRITICAL, kappa) > 0

    def test_zero_stay_at_origin_when_first_interval_is_one(self):
        # an excursion from the origin into an interval of length 1 always reaches x_1
        assert prob_A_kappa(CRITICAL, (0,)) == 0

    def test_matches_site_level_oracle(self):
        ls = Landscape((3, 2, 4, 1), 12)
        for i in range(1, 6):
            for kappa in enumerate_K(i):
                if sum(kappa) + 1 <= ls.n_intervals:
                    assert prob_A_kappa(ls, kappa) == oracle.kappa_probability(ls, kappa)

    def test_out_of_range_history(self):
        with pytest.raises(ValidationError):
            prob_A_kappa(Landscape((2, 3)), (1, 1))
        with pytest.raises(ValidationError):
            prob_A_kappa(Landscape((2, 3)), (-1,))


class TestExpectedY:
    def test_examples(self):
        assert expected_Y_given_Aplus(Landscape((4, 8, 32)), ()) == 3
        assert expected_Y_given_Aplus(Landscape((4, 8, 32, 9)), (1, 0, -1)) == 3
        assert expected_Y_given_Aplus(Landscape((1, 2, 8)), (1,)) == 1

    def test_relation_to_full_step_count(self):
        # with the forced step counted, the inter-arrival time is one more
        ls = Landscape((3, 2, 5, 1), 13)
        for kappa in [(), (1,), (0, 1), (1, 1), (1, 1, 1)]:
            j = sum(kappa)
            assert oracle.next_hit_time(ls, j, plus=True) == 1 + expected_Y_given_Aplus(ls, kappa)

    def test_conditioning_increases_time(self):
        # the conditioned inter-arrival time dominates the unconditioned one
        ls = Landscape((3, 2, 5, 4), 19)
        for j in range(ls.n_intervals):
            assert oracle.next_hit_time(ls, j) <= oracle.next_hit_time(ls, j, plus=True)


class TestClosedForm:
    def test_examples(self):
        assert formula_kappa_one(Landscape((1, 2, 8)), Fraction(2), 2) == Fraction(2, 3)
        assert formula_kappa_one(Landscape((4, 8, 32)), Fraction(1, 2), 2) == Fraction(7, 6)
        assert formula_kappa_one(Landscape((4, 8, 32)), Fraction(1, 2), 1) == 3

    @pytest.mark.parametrize("ls,c", [(CRITICAL, Fraction(2)), (SUBCRITICAL, Fraction(1, 2))])
    def test_matches_product(self, ls, c):
        for i in range(1, 7):
            assert formula_kappa_one(ls, c, i) == contribution(ls, (1,) * (i - 1))

    def test_requires_recursion(self):
        with pytest.raises(ValidationError):
            formula_kappa_one(Landscape((1, 2, 9)), Fraction(2), 3)


class TestBounds:
    @pytest.mark.parametrize("ls,c,imax", [(Landscape((1, 2, 8, 128)), Fraction(2), 5),
                                           (Landscape((4, 8, 32)), Fraction(1, 2), 4)])
    def test_spec_examples_hold(self, ls, c, imax):
        report = verify_lemma41_bounds(ls, c, imax)
        assert report.violations == []

    def test_all_right_history(self):
        report = verify_lemma41_bounds(SUBCRITICAL, Fraction(1, 2), 4)
        ones = [chk for chk in report.checks if chk.kappa == (1,) * len(chk.kappa)]
        for chk in ones:
            if chk.bound_kind == "upper":
                assert chk.lhs == chk.rhs
            else:
                assert chk.lhs == 2 * chk.rhs

    def test_report_json(self):
        doc = verify_lemma41_bounds(CRITICAL, Fraction(2), 2).to_json()
        assert doc[0] == {"kappa": [], "lhs": "0/1", "rhs": "0/1", "bound_kind": "upper", "holds": True}

    def test_requires_recursion(self):
        with pytest.raises(ValidationError):
            verify_lemma41_bounds(Landscape((1, 2, 9)), Fraction(2), 3)
