"""Acceptance criteria 1-10, one test each.

Every test records a ``criterion N: PASS|FAIL ...`` line before asserting.
The lines are printed together in the terminal summary.
"""
from __future__ import annotations

import random
import time
from fractions import Fraction

from conftest import ACCEPTANCE_LINES, random_walled_landscape
from trapwalk import oracle
from trapwalk.criticality import classify
from trapwalk.exact_engine import expected_survival
from trapwalk.landscape import Landscape, RecursionParams, generate_recursive, validate_c
from trapwalk.mc_sim import SimConfig, simulate_site, simulate_traplevel
from trapwalk.monotonicity import (
    compute_split_stats,
    decompose_trajectory,
    find_counterexample,
    survival_via_split,
    trajectory_from_runs,
    verify_lemma52,
)
from trapwalk.path_enumerator import (
    contribution,
    enumerate_K,
    formula_kappa_one,
    verify_lemma41_bounds,
)

CRITICAL = (generate_recursive(RecursionParams(1, Fraction(2), 6)), Fraction(2))
SUBCRITICAL = (generate_recursive(RecursionParams(4, Fraction(1, 2), 6)), Fraction(1, 2))


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def test_criterion_1_oracle_equivalence():
    rng = random.Random(1)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(220):
        ls = random_walled_landscape(rng, max_span=40)
        mismatches += expected_survival(ls).expected_tau != oracle.dense_expected_survival(ls)
    elapsed = time.perf_counter() - t0
    record(1, mismatches == 0 and elapsed <= 60,
           f"220 landscapes, {mismatches} mismatches, {elapsed:.1f}s (limit 60s)")


def test_criterion_2_closed_form():
    bad = [(ls.intervals[0], i) for ls, c in (CRITICAL, SUBCRITICAL) for i in range(1, 7)
           if formula_kappa_one(ls, c, i) != contribution(ls, (1,) * (i - 1))]
    record(2, not bad, f"i = 1..6 on both landscapes, mismatches {bad}")


def test_criterion_3_bounds():
    t0 = time.perf_counter()
    sequences = violations = 0
    for ls, c in (CRITICAL, SUBCRITICAL):
        report = verify_lemma41_bounds(ls, c, 6)
        sequences += report.n_sequences
        violations += len(report.violations)
    elapsed = time.perf_counter() - t0
    expected = 2 * sum(sum(1 for _ in enumerate_K(i)) for i in range(1, 7))
    record(3, violations == 0 and sequences == expected >= 300 and elapsed <= 30,
           f"{sequences} sequences, {violations} violations, {elapsed:.1f}s (limit 30s)")


def test_criterion_4_phase_table():
    wrong = []
    for I1 in range(1, 9):
        for m in range(2, 2 * I1 + 1):
            c = Fraction(m, I1)
            want = "finite" if c < 1 else "infinite" if c > 1 else "indeterminate"
            got = classify(RecursionParams(I1, c)).verdict
            if got != want:
                wrong.append((I1, m, got))
    examples = (classify(RecursionParams(1, Fraction(2))).verdict == "infinite"
                and classify(RecursionParams(4, Fraction(1, 2))).verdict == "finite")
    record(4, not wrong and examples, f"grid I1 1..8, m 2..2*I1, wrong cells {wrong}")


def _pairs(seed: int, count: int, need_interval: bool):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        ls = random_walled_landscape(rng, max_span=40)
        top = ls.n_intervals if need_interval else ls.n_traps
        if top >= 1:
            out.append((ls, rng.randint(1, top)))
    return out


def test_criterion_5_split_identity():
    pairs = _pairs(5, 120, need_interval=False)
    bad = sum(survival_via_split(compute_split_stats(ls, k)) != expected_survival(ls).expected_tau
              for ls, k in pairs)
    record(5, bad == 0, f"{len(pairs)} (landscape, k) pairs, {bad} mismatches")


def test_criterion_6_insertion_identities():
    pairs = _pairs(6, 120, need_interval=True)
    bad = sum(not verify_lemma52(ls, k).holds for ls, k in pairs)
    record(6, bad == 0, f"{len(pairs)} insertion pairs, {bad} failures")


def test_criterion_7_witness():
    t0 = time.perf_counter()
    pair = find_counterexample(10, 60, [1, 2, 5])
    elapsed = time.perf_counter() - t0
    s = compute_split_stats(pair.first, pair.k)
    I1, I3 = pair.first.intervals[0], pair.first.intervals[2]
    third = Fraction(1, 3)
    ok = (pair.tau_second < pair.tau_first
          and third <= s.Pplus <= 2 * third and third <= s.Pminus <= 2 * third
          and s.Eminus <= 2 * I1 + 1 and s.Eplus >= Fraction(I3 - 1, 3) and elapsed <= 300)
    record(7, ok, f"{pair.first.intervals} wall {pair.first.wall}: "
                  f"E1 = {pair.tau_first}, E2 = {pair.tau_second}, {elapsed:.1f}s (limit 300s)")


def test_criterion_8_example_replay():
    d = decompose_trajectory(trajectory_from_runs([0, 2, 1, 8, 4, 10, 3]), Landscape((3, 4, 5)), 3)
    ok = d.l_times == (9, 10, 11, 18, 23) and d.T_segments == (9, 1, 1, 7, 5, 5) and d.tau == 28
    record(8, ok, f"l = {d.l_times}, T = {d.T_segments}, tau = {d.tau}")


# every instance has an interval of length >= 3; with lengths <= 2 all
# trap-to-trap durations are deterministic and the two variances coincide
MC_INSTANCES = [
    Landscape((3,), 5), Landscape((1, 3), 6), Landscape((3, 4, 5), 13), Landscape((4, 1, 6), 17),
    Landscape((1, 1, 3), 7), Landscape((5,), 9), Landscape((2, 3, 2, 3), 12), Landscape((6, 3), 12),
    Landscape((1, 2, 8), 14), Landscape((3, 1, 2, 5, 2), 16),
]


def test_criterion_9_monte_carlo():
    within = 0
    trap_smaller = 0
    worst = 0.0
    for idx, ls in enumerate(MC_INSTANCES):
        exact = float(expected_survival(ls).expected_tau)
        site = simulate_site(ls, SimConfig(seed=900 + idx, n_paths=50_000))
        trap = simulate_traplevel(ls, SimConfig(seed=900 + idx, n_paths=50_000, mode="trap"))
        zs = (site.z_score(exact), trap.z_score(exact))
        worst = max(worst, *zs)
        within += sum(z <= 3 for z in zs)
        trap_smaller += trap.variance <= site.variance
    ok = within == 2 * len(MC_INSTANCES) and trap_smaller >= 8
    record(9, ok, f"{within}/20 estimates within 3 SE (max |z| {worst:.2f}), "
                  f"trap variance <= site on {trap_smaller}/10")


def test_criterion_10_integrality():
    rng = random.Random(10)
    errors = 0
    for trial in range(1000):
        I1 = rng.randint(1, 500)
        if trial % 2:
            c = Fraction(rng.randint(1, 4 * I1), I1)  # a member by construction
        else:
            c = Fraction(rng.randint(1, 2000), rng.randint(1, 60))
        member = (c.numerator * I1) % c.denominator == 0
        given = f"{c.numerator * 3}/{c.denominator * 3}" if trial % 3 == 0 else c
        errors += validate_c(I1, given).valid != member
    record(10, errors == 0, f"1000 trials, {errors} false accepts/rejects")
