"""Site-level ground truth for small landscapes.

Everything here works directly with the one-step transition table of the
trapped walk (no gambler's-ruin formulas, no embedded chain), and solves its
absorbing-chain systems by plain dense Gauss-Jordan elimination over the
rationals.  It is deliberately slow and independent of ``exact_engine``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, ValidationError
from .landscape import Landscape

DEATH = "*"
MAX_DENSE_SITES = 400
MAX_EXACT_HORIZON = 10_000
MAX_HORIZON = 1_000_000


def transitions(ls: Landscape, x: int) -> dict:
    """One-step law from site x: {site or DEATH: probability}.  The wall is absorbing."""
    if ls.wall is not None and x == ls.wall:
        return {x: Fraction(1)}
    trapped = x in ls.trap_set()
    if x == 0:
        return {1: Fraction(2, 3), DEATH: Fraction(1, 3)} if trapped else {1: Fraction(1)}
    if trapped:
        third = Fraction(1, 3)
        return {x - 1: third, x + 1: third, DEATH: third}
    half = Fraction(1, 2)
    return {x - 1: half, x + 1: half}


def check_trajectory(traj: Sequence, ls: Landscape) -> tuple[list[int], str]:
    """Validate an explicit path; returns (sites, "death" | "wall").

    The path lists the sites at times 0, 1, ... and ends either with the
    death marker (the walk dies on its last listed site) or with the wall site.
    """
    if len(traj) < 2:
        raise ValidationError("trajectory needs a start and an end: tau is undefined")
    if traj[0] != 0:
        raise ValidationError("trajectory must start at the origin")
    if traj[-1] == DEATH:
        sites, ended = list(traj[:-1]), "death"
    elif ls.wall is not None and traj[-1] == ls.wall:
        sites, ended = list(traj), "wall"
    else:
        raise ValidationError(f"trajectory must end with {DEATH!r} or at the wall")
    for t, (a, b) in enumerate(zip(sites, sites[1:])):
        if isinstance(b, bool) or not isinstance(b, int):
            raise ValidationError(f"illegal entry {b!r} at time {t + 1}")
        if ls.wall is not None and a == ls.wall:
            raise ValidationError(f"walk continues after reaching the wall at time {t}")
        if transitions(ls, a).get(b, 0) == 0:
            raise ValidationError(f"illegal step {a} -> {b} at time {t + 1}")
    if ended == "death" and transitions(ls, sites[-1]).get(DEATH, 0) == 0:
        raise ValidationError(f"death at non-trap site {sites[-1]}")
    return sites, ended


def gauss_jordan(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise ValidationError("oracle system is singular")
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def _check_span(ls: Landscape) -> int:
    wall = ls.require_wall()
    if wall > MAX_DENSE_SITES:
        raise BudgetExceeded(f"span {wall} exceeds the dense oracle limit {MAX_DENSE_SITES}")
    return wall


def dense_expected_survival(ls: Landscape) -> Fraction:
    """E(tau) from the full site-level system (I - Q) t = 1 on sites 0..wall-1."""
    wall = _check_span(ls)
    n = wall
    A = [[Fraction(int(r == c)) for c in range(n)] for r in range(n)]
    for x in range(n):
        for y, p in transitions(ls, x).items():
            if y != DEATH and y < wall:
                A[x][y] -= p
    return gauss_jordan(A, [Fraction(1)] * n)[0]


def dense_absorption(ls: Landscape) -> tuple[Fraction, Fraction]:
    """(P(death), P(wall)) for the walk started at the origin."""
    wall = _check_span(ls)
    n = wall
    A = [[Fraction(int(r == c)) for c in range(n)] for r in range(n)]
    b = [Fraction(0)] * n
    for x in range(n):
        for y, p in transitions(ls, x).items():
            if y == DEATH:
                continue
            if y == wall:
                b[x] += p
            else:
                A[x][y] -= p
    p_wall = gauss_jordan(A, b)[0]
    return 1 - p_wall, p_wall


def truncated_expectation(ls: Landscape, horizon: int) -> Fraction | float:
    """E(tau ∧ horizon) = sum_{t < horizon} P(tau > t) by propagating the site law."""
    wall = _check_span(ls)
    if horizon > MAX_HORIZON:
        raise BudgetExceeded(f"horizon {horizon} exceeds {MAX_HORIZON}")
    if horizon <= MAX_EXACT_HORIZON:
        dist = [Fraction(0)] * wall
        dist[0] = Fraction(1)
        total = Fraction(0)
        for _ in range(horizon):
            total += sum(dist)
            new = [Fraction(0)] * wall
            for x, mass in enumerate(dist):
                if mass:
                    for y, p in transitions(ls, x).items():
                        if y != DEATH and y < wall:
                            new[y] += mass * p
            dist = new
        return total
    P = np.zeros((wall, wall))
    for x in range(wall):
        for y, p in transitions(ls, x).items():
            if y != DEATH and y < wall:
                P[x, y] = float(p)
    vec = np.zeros(wall)
    vec[0] = 1.0
    total = 0.0
    for _ in range(horizon):
        total += vec.sum()
        vec = vec @ P
    return total


# ---------------------------------------------------------------- trap hits


def _local_region(ls: Landscape, j: int) -> tuple[int, int]:
    """Sites strictly between the traps (or wall) adjacent to trap j."""
    pos = ls.positions
    lo = pos[j - 1] if j > 0 else 0
    if j < ls.n_intervals:
        hi = pos[j + 1]
    elif ls.wall is not None:
        hi = ls.wall
    else:
        raise ValidationError(f"trap {j} has no right neighbour and the landscape has no wall")
    if hi - lo > MAX_DENSE_SITES:
        raise BudgetExceeded(f"region around trap {j} is wider than {MAX_DENSE_SITES} sites")
    return lo, hi


def next_hit_distribution(ls: Landscape, j: int) -> dict:
    """Law of what happens after a visit to trap j: next trap index hit, 'die' or 'wall'.

    Obtained by solving, site by site, for the hitting probabilities of the
    absorbing set {traps, wall} started from the neighbours of x_j.
    """
    lo, hi = _local_region(ls, j)
    x_j = ls.positions[j]
    traps = ls.trap_set()
    index = {p: i for i, p in enumerate(ls.positions)}
    absorbing = [y for y in range(lo, hi + 1) if y in traps or y == ls.wall]
    free = [y for y in range(lo, hi + 1) if y not in absorbing]
    col = {y: i for i, y in enumerate(free)}
    result: dict = {"die": Fraction(0)}
    for target in absorbing:
        A = [[Fraction(int(r == c)) for c in range(len(free))] for r in range(len(free))]
        b = [Fraction(0)] * len(free)
        for y in free:
            for z, p in transitions(ls, y).items():
                if z == target:
                    b[col[y]] += p
                elif z in col:
                    A[col[y]][col[z]] -= p
        h = gauss_jordan(A, b) if free else []
        prob = Fraction(0)
        for z, p in transitions(ls, x_j).items():
            if z == DEATH:
                continue
            prob += p * (Fraction(int(z == target)) if z not in col else h[col[z]])
        key = "wall" if target == ls.wall else index[target]
        result[key] = result.get(key, Fraction(0)) + prob
    result["die"] = transitions(ls, x_j)[DEATH]
    return result


def kappa_probability(ls: Landscape, kappa: Sequence[int]) -> Fraction:
    """P(the embedded walk's first len(kappa) moves have the given signs), site level."""
    prob = Fraction(1)
    trap = 0
    for step in kappa:
        law = next_hit_distribution(ls, trap)
        prob *= law.get(trap + step, Fraction(0))
        trap += step
        if prob == 0:
            break
    return prob


def next_hit_time(ls: Landscape, j: int, plus: bool = False) -> Fraction:
    """Expected time from a visit at trap j until the next trap hit, death or wall.

    With ``plus`` the walk is conditioned to survive and step right first;
    the forced step is counted.
    """
    lo, hi = _local_region(ls, j)
    x_j = ls.positions[j]
    traps = ls.trap_set()
    free = [y for y in range(lo, hi + 1) if y not in traps and y != ls.wall]
    col = {y: i for i, y in enumerate(free)}
    A = [[Fraction(int(r == c)) for c in range(len(free))] for r in range(len(free))]
    for y in free:
        for z, p in transitions(ls, y).items():
            if z in col:
                A[col[y]][col[z]] -= p
    t = gauss_jordan(A, [Fraction(1)] * len(free)) if free else []

    def after(z) -> Fraction:
        return Fraction(0) if z not in col else t[col[z]]

    if plus:
        return 1 + after(x_j + 1)
    return sum((p * (1 + after(z)) for z, p in transitions(ls, x_j).items()), Fraction(0))


@dataclass(frozen=True)
class OracleSummary:
    expected_tau: Fraction | float
    horizon: int | None
    death_prob: Fraction
    wall_prob: Fraction
    next_hit: tuple[dict, ...]

    def kappa_probability(self, kappa: Sequence[int]) -> Fraction:
        prob = Fraction(1)
        trap = 0
        for step in kappa:
            prob *= self.next_hit[trap].get(trap + step, Fraction(0))
            trap += step
        return prob


def site_level_oracle(ls: Landscape, horizon: int | None = None) -> OracleSummary:
    """Ground-truth summaries: E(tau ∧ horizon) (exact when horizon is None),
    absorption split, and per-trap next-hit laws."""
    tau = dense_expected_survival(ls) if horizon is None else truncated_expectation(ls, horizon)
    death, wall = dense_absorption(ls)
    laws = tuple(next_hit_distribution(ls, j) for j in range(ls.n_traps))
    return OracleSummary(tau, horizon, death, wall, laws)
