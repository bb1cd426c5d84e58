"""Exact rational computations for the trapped walk.

The walk is reduced to its trap-to-trap (embedded) chain.  Each visit to a
trap ends in one of: death (one step), a move to a neighbouring trap, a
return to the same trap after an excursion, or absorption at the wall.  The
excursions are symmetric gambler's-ruin problems whose exit probabilities
and (conditional) durations have closed forms, so the expected survival time
is ``sum_i V(i) * w(i)`` with V the expected visit counts and w the expected
time of one visit.

Conventions: the step into the death state counts as one time step, and the
step onto the wall site counts as one time step and ends the walk.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal

from . import linalg
from .errors import TrapwalkError, ValidationError
from .landscape import Landscape

ONE = Fraction(1)
SURVIVE = Fraction(2, 3)
DIE = Fraction(1, 3)

Side = Literal["left", "right"]


def _check_order(alpha: int, beta: int, gamma: int) -> None:
    if not alpha < beta < gamma:
        raise ValidationError(f"need alpha < beta < gamma, got {alpha}, {beta}, {gamma}")


def ruin_prob_left(alpha: int, beta: int, gamma: int) -> Fraction:
    """P(simple walk from beta hits alpha before gamma) = (gamma-beta)/(gamma-alpha)."""
    _check_order(alpha, beta, gamma)
    return Fraction(gamma - beta, gamma - alpha)


def exit_time(alpha: int, beta: int, gamma: int) -> Fraction:
    """Expected time for the walk from beta to leave (alpha, gamma)."""
    _check_order(alpha, beta, gamma)
    return Fraction((beta - alpha) * (gamma - beta))


def cond_exit_time(alpha: int, beta: int, gamma: int, side: Side) -> Fraction:
    """Expected exit time from (alpha, gamma) given that the exit is at ``side``.

    With N = gamma-alpha and b = beta-alpha the conditioned walk is a Doob
    h-transform; its mean exit times are (N^2 - b^2)/3 through gamma and
    b(2N - b)/3 through alpha.
    """
    _check_order(alpha, beta, gamma)
    N, b = gamma - alpha, beta - alpha
    if side == "right":
        return Fraction(N * N - b * b, 3)
    if side == "left":
        return Fraction(b * (2 * N - b), 3)
    raise ValidationError(f"side must be 'left' or 'right', got {side!r}")


# ---------------------------------------------------------------- kernel


@dataclass(frozen=True)
class Outcome:
    """One way a visit to a trap can end."""

    dest: str  # "die" | "left" | "stay" | "right" | "wall"
    prob: Fraction
    duration: Fraction  # expected number of steps, conditional on this outcome


def _excursion(gap: int, move_prob: Fraction, dest_far: str) -> list[Outcome]:
    # one step off the trap, then gambler's ruin on an interval of length `gap`
    if gap == 1:
        return [Outcome(dest_far, move_prob, ONE)]
    # near end at 0, walker at 1, far end at gap
    back = ruin_prob_left(0, 1, gap)
    far = 1 - back
    return [
        Outcome(dest_far, move_prob * far, 1 + cond_exit_time(0, 1, gap, "right")),
        Outcome("stay", move_prob * back, 1 + cond_exit_time(0, 1, gap, "left")),
    ]


def trap_outcomes(ls: Landscape, i: int) -> list[Outcome]:
    """All ways a visit to trap i ends, with exact probabilities and durations."""
    n = ls.n_intervals
    if not 0 <= i <= n:
        raise ValidationError(f"trap index {i} out of range 0..{n}")
    if i == n and ls.wall is None:
        raise ValidationError(f"trap {i} is the last trap and the landscape has no wall")
    out = [Outcome("die", DIE, ONE)]
    step = SURVIVE if i == 0 else SURVIVE / 2
    if i > 0:
        # mirror the left excursion: the "far" end is x_{i-1}
        out += _excursion(ls.intervals[i - 1], step, "left")
    if i < n:
        out += _excursion(ls.intervals[i], step, "right")
    else:
        out += _excursion(ls.wall - ls.positions[n], step, "wall")
    return out


@dataclass(frozen=True)
class KernelRow:
    left: Fraction
    stay: Fraction
    right: Fraction
    wall: Fraction
    die: Fraction

    def total(self) -> Fraction:
        return self.left + self.stay + self.right + self.wall + self.die


@dataclass(frozen=True)
class EmbeddedKernel:
    rows: tuple[KernelRow, ...]
    walled: bool

    def __len__(self) -> int:
        return len(self.rows)

    def row(self, i: int) -> KernelRow:
        if not 0 <= i < len(self.rows):
            raise ValidationError(
                f"no kernel row for trap {i}"
                + ("" if self.walled else " (un-walled landscape: last trap has no right neighbour)")
            )
        return self.rows[i]


def _collect(outcomes: Iterable[Outcome]) -> dict[str, Fraction]:
    probs = {"left": Fraction(0), "stay": Fraction(0), "right": Fraction(0),
             "wall": Fraction(0), "die": Fraction(0)}
    for o in outcomes:
        probs[o.dest] += o.prob
    return probs


def kernel_row(ls: Landscape, i: int) -> KernelRow:
    return KernelRow(**_collect(trap_outcomes(ls, i)))


def build_kernel(ls: Landscape) -> EmbeddedKernel:
    """Transition probabilities of the embedded trap chain.

    Without a wall only traps that have a right neighbour get a row.
    """
    last = ls.n_intervals if ls.wall is not None else ls.n_intervals - 1
    return EmbeddedKernel(tuple(kernel_row(ls, i) for i in range(last + 1)), ls.wall is not None)


@dataclass(frozen=True)
class SojournEntry:
    w: Fraction  # expected duration of one visit
    durations: dict  # dest -> conditional expected duration (only for dest with prob > 0)


@dataclass(frozen=True)
class SojournTable:
    entries: tuple[SojournEntry, ...]

    def w(self, i: int) -> Fraction:
        return self.entries[i].w


def sojourn_entry(ls: Landscape, i: int) -> SojournEntry:
    outcomes = trap_outcomes(ls, i)
    weight: dict[str, Fraction] = {}
    mass: dict[str, Fraction] = {}
    for o in outcomes:
        weight[o.dest] = weight.get(o.dest, Fraction(0)) + o.prob * o.duration
        mass[o.dest] = mass.get(o.dest, Fraction(0)) + o.prob
    durations = {d: weight[d] / mass[d] for d in mass if mass[d] > 0}
    return SojournEntry(sum(weight.values(), Fraction(0)), durations)


def build_sojourn_table(ls: Landscape) -> SojournTable:
    ls.require_wall()
    return SojournTable(tuple(sojourn_entry(ls, i) for i in range(ls.n_traps)))


# ---------------------------------------------------------------- survival


@dataclass(frozen=True)
class SurvivalResult:
    expected_tau: Fraction
    visit_counts: tuple[Fraction, ...]
    sojourn: tuple[Fraction, ...]
    death_prob: Fraction
    wall_prob: Fraction
    wall: int
    trap_count: int

    @property
    def expected_visits(self) -> Fraction:
        """E(N): expected number of trap visits."""
        return sum(self.visit_counts, Fraction(0))


def visit_counts(ls: Landscape, kernel: EmbeddedKernel | None = None) -> list[Fraction]:
    """Expected number of visits to each trap, from (I - K^T) V = e_0."""
    kernel = build_kernel(ls) if kernel is None else kernel
    size = len(kernel)
    A = [[Fraction(int(r == c)) for c in range(size)] for r in range(size)]
    for src, row in enumerate(kernel.rows):
        for dst, p in ((src - 1, row.left), (src, row.stay), (src + 1, row.right)):
            if p:
                A[dst][src] -= p
    rhs = [Fraction(0)] * size
    rhs[0] = ONE
    try:
        return linalg.solve(A, rhs)
    except linalg.SingularSystem as exc:  # pragma: no cover - substochastic kernels are never singular
        raise TrapwalkError("embedded chain system is singular") from exc


def expected_survival(ls: Landscape) -> SurvivalResult:
    """Exact E(tau) for the walk started at the origin of a walled landscape."""
    wall = ls.require_wall()
    kernel = build_kernel(ls)
    table = build_sojourn_table(ls)
    V = visit_counts(ls, kernel)
    w = [table.w(i) for i in range(ls.n_traps)]
    tau = sum((v * wi for v, wi in zip(V, w)), Fraction(0))
    death = sum(V, Fraction(0)) * DIE
    wall_prob = V[-1] * kernel.rows[-1].wall
    return SurvivalResult(tau, tuple(V), tuple(w), death, wall_prob, wall, ls.n_traps)


# ---------------------------------------------------------------- first passage


def site_step_probs(traps: frozenset[int], x: int) -> tuple[Fraction, Fraction, Fraction]:
    """(P(x -> x-1), P(x -> x+1), P(x -> death)) for the site-level walk."""
    if x in traps:
        if x == 0:
            return Fraction(0), SURVIVE, DIE
        return DIE, DIE, DIE
    if x == 0:
        # origin without a trap reflects; never happens for valid landscapes
        return Fraction(0), ONE, Fraction(0)
    half = Fraction(1, 2)
    return half, half, Fraction(0)


def _thomas(sub: list[Fraction], diag: list[Fraction], sup: list[Fraction],
            rhs: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(diag)
    k = len(rhs)
    c = [Fraction(0)] * n
    d = [[Fraction(0)] * n for _ in range(k)]
    for i in range(n):
        denom = diag[i] - (sub[i] * c[i - 1] if i else 0)
        c[i] = sup[i] / denom if i < n - 1 else Fraction(0)
        for r in range(k):
            prev = d[r][i - 1] if i else 0
            d[r][i] = (rhs[r][i] - (sub[i] * prev if i else 0)) / denom
    for r in range(k):
        for i in range(n - 2, -1, -1):
            d[r][i] -= c[i] * d[r][i + 1]
    return d


def first_passage_stats(ls: Landscape, start: int, exit_set: Iterable[int]) -> tuple[Fraction, Fraction]:
    """(P(reach exit_set before death/wall), E[time until exit, death or wall]).

    Solved directly at site level; the region is the stretch between the
    nearest exit sites around ``start`` (the origin reflects, the wall
    absorbs without counting as an exit).
    """
    exits = set(exit_set)
    wall = ls.wall
    if start < 0 or (wall is not None and start > wall):
        raise ValidationError(f"start {start} outside the landscape")
    if start in exits:
        return ONE, Fraction(0)
    if wall is not None and start == wall:
        return Fraction(0), Fraction(0)
    left = max((e for e in exits if 0 <= e < start), default=None)
    right = min((e for e in exits if e > start), default=None)
    if wall is not None and (right is None or right > wall):
        right_exit = False
        right = wall
    else:
        right_exit = right is not None
    if right is None:
        raise ValidationError("region right of start is unbounded: wall or exit site required")
    if left is None and not right_exit:
        raise ValidationError("exit set is unreachable from start")
    lo = 0 if left is None else left + 1
    hi = right - 1
    traps = ls.trap_set()
    size = hi - lo + 1
    sub = [Fraction(0)] * size
    sup = [Fraction(0)] * size
    diag = [ONE] * size
    hit_rhs = [Fraction(0)] * size
    time_rhs = [ONE] * size
    for idx, x in enumerate(range(lo, hi + 1)):
        pl, pr, _ = site_step_probs(traps, x)
        if x - 1 >= lo:
            sub[idx] = -pl
        elif left is not None:
            hit_rhs[idx] += pl
        if x + 1 <= hi:
            sup[idx] = -pr
        elif right_exit:
            hit_rhs[idx] += pr
    h, t = _thomas(sub, diag, sup, [hit_rhs, time_rhs])
    return h[start - lo], t[start - lo]
