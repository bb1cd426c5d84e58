"""Splitting the survival time across a cut, and non-monotonicity witnesses.

Fix a split index k and write x = x_{k-1}.  The half line is cut into
S- = {0, ..., x} and S+ = {x+1, ...}.  The walk alternates between the two
halves until it dies (or hits the wall), so E(tau) is a geometric series in
the crossing probabilities:

    E(tau) = E0 + P0 [E- + E+ P-] / (1 - P+ P-)

Here P0/E0 describe the first arrival at x from the origin, P-/E- one stay in
S- entered at x, and P+/E+ one stay in S+ entered at x+1.

Lengthening interval k by one site changes only the S+ quantities, via
P+' = 1/(2 - P+) and E+' = (E+ + 2)/(2 - P+).  That makes the sign of
E(tau') - E(tau) an explicit function of the split statistics.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .criticality import CriticalityReport, classify
from .errors import BudgetExceeded, TrapwalkError, ValidationError
from .exact_engine import expected_survival, first_passage_stats
from .landscape import Landscape, RecursionParams, insert_site
from .oracle import DEATH, MAX_DENSE_SITES, check_trajectory, transitions
from .rational import format_rational


@dataclass(frozen=True)
class SplitStats:
    landscape: Landscape
    k: int
    E0: Fraction
    P0: Fraction
    Eminus: Fraction
    Pminus: Fraction
    Eplus: Fraction
    Pplus: Fraction

    @property
    def cut(self) -> int:
        """The site x_{k-1}, the rightmost site of S-."""
        return self.landscape.positions[self.k - 1]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "landscape": self.landscape.to_json(),
            **{name: format_rational(getattr(self, name))
               for name in ("E0", "P0", "Eminus", "Pminus", "Eplus", "Pplus")},
        }


def compute_split_stats(ls: Landscape, k: int) -> SplitStats:
    ls.require_wall()
    if not 1 <= k <= ls.n_traps:
        raise ValidationError(f"split index {k} out of range 1..{ls.n_traps}")
    x = ls.positions[k - 1]
    P0, E0 = first_passage_stats(ls, 0, {x})
    Pm, Em = first_passage_stats(ls, x, {x + 1})
    # if x+1 is the wall, entering S+ ends the walk: first_passage_stats gives (0, 0)
    Pp, Ep = first_passage_stats(ls, x + 1, {x})
    return SplitStats(ls, k, E0, P0, Em, Pm, Ep, Pp)


def survival_via_split(stats: SplitStats) -> Fraction:
    denom = 1 - stats.Pplus * stats.Pminus
    if denom == 0:
        raise TrapwalkError("crossing probabilities multiply to 1: the walk never terminates")
    return stats.E0 + stats.P0 * (stats.Eminus + stats.Eplus * stats.Pminus) / denom


# ---------------------------------------------------------------- site insertion


@dataclass
class Lemma52Report:
    k: int
    original: SplitStats
    inserted: SplitStats
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "holds": self.holds,
            "checks": dict(self.checks),
            "original": self.original.to_json(),
            "inserted": self.inserted.to_json(),
        }


def predicted_plus_after_insert(stats: SplitStats) -> tuple[Fraction, Fraction]:
    """(P+, E+) of the landscape with interval k lengthened by one site."""
    denom = 2 - stats.Pplus
    return 1 / denom, (stats.Eplus + 2) / denom


def verify_lemma52(ls: Landscape, k: int) -> Lemma52Report:
    if not 1 <= k <= ls.n_intervals:
        raise ValidationError(f"interval index {k} out of range 1..{ls.n_intervals}")
    s1 = compute_split_stats(ls, k)
    s2 = compute_split_stats(insert_site(ls, k), k)
    P2, E2 = predicted_plus_after_insert(s1)
    checks = {
        "Pplus": s2.Pplus == P2,
        "Eplus": s2.Eplus == E2,
        "Pminus unchanged": s1.Pminus == s2.Pminus,
        "Eminus unchanged": s1.Eminus == s2.Eminus,
        "P0 unchanged": s1.P0 == s2.P0,
        "E0 unchanged": s1.E0 == s2.E0,
    }
    return Lemma52Report(k, s1, s2, checks)


def nonmono_condition_rhs(stats: SplitStats) -> Fraction:
    """(E(tau') - E(tau)) / P0 after lengthening interval k by one site.

    Non-negative exactly when adding the site does not shorten the expected
    survival time.
    """
    Pp, Pm, Ep, Em = stats.Pplus, stats.Pminus, stats.Eplus, stats.Eminus
    a = 2 - Pp - Pm
    b = 1 - Pp * Pm
    return (Em * ((2 - Pp) / a - 1 / b)
            + Ep * Pm * (1 / a - 1 / b)
            + 2 * Pm / a)


# ---------------------------------------------------------------- counterexamples


@dataclass(frozen=True)
class Counterexample:
    first: Landscape
    second: Landscape
    k: int
    tau_first: Fraction
    tau_second: Fraction
    rhs: Fraction

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "first": self.first.to_json(),
            "second": self.second.to_json(),
            "expected_tau_first": format_rational(self.tau_first),
            "expected_tau_second": format_rational(self.tau_second),
            "difference": format_rational(self.tau_second - self.tau_first),
            "rhs": format_rational(self.rhs),
        }


class SearchExhausted(TrapwalkError):
    def __init__(self, B1: int, B3: int, offsets: Sequence[int], tried: int):
        super().__init__(
            f"no counterexample with |I_1| <= {B1}, |I_3| <= {B3}, wall offsets {list(offsets)} "
            f"({tried} candidates tried)"
        )
        self.B1, self.B3, self.offsets, self.tried = B1, B3, list(offsets), tried


def family_landscape(I1: int, I3: int, offset: int) -> Landscape:
    """Lengths [I1, 1, I3] (so x_2 = x_1 + 1) with the wall ``offset`` sites past x_3."""
    if offset < 1:
        raise ValidationError("wall offset must be >= 1")
    return Landscape((I1, 1, I3), I1 + 1 + I3 + offset)


def check_pair(first: Landscape, k: int) -> Counterexample:
    second = insert_site(first, k)
    return Counterexample(
        first, second, k,
        expected_survival(first).expected_tau,
        expected_survival(second).expected_tau,
        nonmono_condition_rhs(compute_split_stats(first, k)),
    )


def find_counterexample(B1: int, B3: int, wall_offsets: Iterable[int] = (1,)) -> Counterexample:
    """Smallest (|I_3|, |I_1|, offset) in the family where adding a site shortens E(tau).

    The search runs |I_3| outermost because large |I_3| is what drives the
    S+ excursions, and with them the sign change.
    """
    offsets = list(wall_offsets)
    if B1 < 1 or B3 < 1 or not offsets:
        raise ValidationError("search bounds must be >= 1 and offsets non-empty")
    tried = 0
    for I3 in range(1, B3 + 1):
        for I1 in range(1, B1 + 1):
            for off in offsets:
                tried += 1
                pair = check_pair(family_landscape(I1, I3, off), 2)
                if pair.tau_second < pair.tau_first:
                    return pair
    raise SearchExhausted(B1, B3, offsets, tried)


@dataclass(frozen=True)
class RecursivePairReport:
    sparse: CriticalityReport   # longer intervals everywhere
    dense: CriticalityReport
    sparse_lengths: tuple[int, ...]
    dense_lengths: tuple[int, ...]

    @property
    def non_monotone(self) -> bool:
        """Fewer traps, yet finite expected survival, against more traps and infinite."""
        longer = all(a >= b for a, b in zip(self.sparse_lengths, self.dense_lengths))
        return longer and self.sparse.verdict == "finite" and self.dense.verdict == "infinite"


def recursive_pair(dense: RecursionParams = RecursionParams(1, Fraction(2)),
                   sparse: RecursionParams = RecursionParams(4, Fraction(1, 2)),
                   n_compare: int = 6) -> RecursivePairReport:
    """Compare two recursive landscapes whose lengths are ordered interval by interval."""
    def lengths(p: RecursionParams) -> tuple[int, ...]:
        out = [p.I1]
        for _ in range(n_compare - 1):
            out.append((p.c * out[-1] ** 2).numerator)
        return tuple(out)

    return RecursivePairReport(classify(sparse), classify(dense), lengths(sparse), lengths(dense))


# ---------------------------------------------------------------- trajectories

WALL = "wall"
INF = None  # l_i = infinity


@dataclass(frozen=True)
class TrajectoryDecomposition:
    trajectory: tuple
    k: int
    tau: int
    ended_by: str  # "death" or "wall"
    l_times: tuple[int, ...]  # the finite ones; all later l_i are infinite
    T_segments: tuple[int, ...]  # T_0, T_1, ... up to the last non-zero (T_0 always kept)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "tau": self.tau,
            "ended_by": self.ended_by,
            "l_times": list(self.l_times),
            "T_segments": list(self.T_segments),
        }


def trajectory_from_runs(runs: Sequence[int], end: str = DEATH) -> list:
    """Expand turning points such as [0, 2, 1, 8] into a unit-step site list, then append the end marker."""
    if not runs:
        raise ValidationError("need at least one site")
    sites = [runs[0]]
    for target in runs[1:]:
        step = 1 if target > sites[-1] else -1
        sites.extend(range(sites[-1] + step, target + step, step))
    if end == DEATH:
        return sites + [DEATH]
    if end == WALL:
        return sites
    raise ValidationError(f"end must be {DEATH!r} or {WALL!r}")


def decompose_trajectory(traj: Sequence, ls: Landscape, k: int) -> TrajectoryDecomposition:
    """Crossing times l_0, l_1, ... of the cut at x_{k-1} and the pieces T_n of tau.

    ``traj`` lists the sites visited at times 0, 1, ...; it ends with the
    death marker ``"*"`` (the death step counts) or with the wall site.
    """
    if not 1 <= k <= ls.n_traps:
        raise ValidationError(f"split index {k} out of range 1..{ls.n_traps}")
    sites, ended = check_trajectory(traj, ls)
    tau = len(sites) if ended == "death" else len(sites) - 1
    x = ls.positions[k - 1]
    targets = (x, x + 1)
    l_times: list[int] = []
    for t, s in enumerate(sites):
        if s == targets[len(l_times) % 2]:
            l_times.append(t)
    T = []
    prev = 0
    for l in l_times:
        T.append(min(tau, l) - prev)
        prev = min(tau, l)
    T.append(tau - prev)
    while len(T) > 1 and T[-1] == 0:
        T.pop()
    if sum(T) != tau:  # pragma: no cover - arithmetic identity
        raise AssertionError("segments do not add up to tau")
    return TrajectoryDecomposition(tuple(traj), k, tau, ended, tuple(l_times), tuple(T))


def crossing_probabilities(ls: Landscape, k: int, n_max: int) -> list[Fraction]:
    """Pr(l_n < infinity) for n = 0..n_max, from the site chain augmented with a crossing counter.

    Independent of ``first_passage_stats``: the states are (site, phase)
    pairs, where the phase counts the crossing times already passed, and one
    exact elimination yields every n at once.
    """
    wall = ls.require_wall()
    if not 1 <= k <= ls.n_traps:
        raise ValidationError(f"split index {k} out of range 1..{ls.n_traps}")
    if wall * (n_max + 1) > MAX_DENSE_SITES * 4:
        raise BudgetExceeded("product chain too large for the exact solver")
    x = ls.positions[k - 1]

    def advance(site: int, phase: int) -> int:
        return phase + 1 if site == (x, x + 1)[phase % 2] else phase

    states = [(s, p) for p in range(n_max + 1) for s in range(wall)]
    index = {st: i for i, st in enumerate(states)}
    size = len(states)
    # sparse rows of (I - Q | B), B[:, n] = one-step mass from phase n into phase n + 1
    rows: list[dict[int, Fraction]] = []
    for s, p in states:
        row: dict[int, Fraction] = {index[(s, p)]: Fraction(1)}
        for y, prob in transitions(ls, s).items():
            if y == DEATH:
                continue
            q = advance(y, p)
            if y != wall and q <= n_max:
                col = index[(y, q)]
                row[col] = row.get(col, Fraction(0)) - prob
            if q == p + 1:
                # phase n = p is entered at most once, so this counts Pr(l_p < infinity)
                row[size + p] = row.get(size + p, Fraction(0)) + prob
        rows.append(row)
    for col in range(size):
        piv = rows[col]
        scale = piv[col]
        if scale != 1:
            piv = rows[col] = {j: v / scale for j, v in piv.items()}
        for r in range(size):
            if r != col and col in rows[r]:
                f = rows[r].pop(col)
                tgt = rows[r]
                for j, v in piv.items():
                    if j != col:
                        nv = tgt.get(j, Fraction(0)) - f * v
                        if nv:
                            tgt[j] = nv
                        else:
                            tgt.pop(j, None)
    start_phase = advance(0, 0)
    out = []
    for n in range(n_max + 1):
        if start_phase > n:
            out.append(Fraction(1))
        else:
            out.append(rows[index[(0, start_phase)]].get(size + n, Fraction(0)))
    return out


def predicted_crossing_probabilities(stats: SplitStats, n_max: int) -> list[Fraction]:
    """P0 (P- P+)^m for n = 2m and P0 P- (P- P+)^m for n = 2m+1."""
    out = []
    for n in range(n_max + 1):
        m, odd = divmod(n, 2)
        out.append(stats.P0 * (stats.Pminus if odd else 1) * (stats.Pminus * stats.Pplus) ** m)
    return out
