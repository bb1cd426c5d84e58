"""Embedded-walk histories and the per-history inter-arrival contributions.

A history is a word over {-1, 0, +1} whose partial sums never go negative:
entry +1 means the next trap hit is the right neighbour, -1 the left one,
0 a return to the same trap.  For a history of length i-1 the quantity of
interest is ``P(history) * E(Y_i | history, then a step right)``, compared
against the all-right history.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import BudgetExceeded, ValidationError
from .exact_engine import kernel_row
from .landscape import Landscape, digit_budget, satisfies_recursion
from .rational import format_rational

Kappa = tuple[int, ...]


def is_admissible(kappa: Sequence[int]) -> bool:
    total = 0
    for step in kappa:
        if step not in (-1, 0, 1):
            return False
        total += step
        if total < 0:
            return False
    return True


def enumerate_K(i: int, prefix: Kappa = ()) -> Iterator[Kappa]:
    """All admissible histories of length i-1 (depth first, pruned on partial sums).

    ``prefix`` restricts the enumeration to one shard of the tree.
    """
    if i < 1:
        raise ValidationError(f"i must be >= 1, got {i}")
    length = i - 1
    if len(prefix) > length or not is_admissible(prefix):
        return
    stack = [(tuple(prefix), sum(prefix))]
    while stack:
        word, total = stack.pop()
        if len(word) == length:
            yield word
            continue
        for step in (1, 0, -1):
            if total + step >= 0:
                stack.append((word + (step,), total + step))


def _check(ls: Landscape, kappa: Sequence[int]) -> None:
    if not is_admissible(kappa):
        raise ValidationError(f"history {tuple(kappa)} has a negative partial sum or bad entry")
    end = sum(kappa)
    if end + 1 > ls.n_intervals:
        raise ValidationError(
            f"history ends at trap {end}; need interval {end + 1}, landscape has {ls.n_intervals}"
        )


def prob_A_kappa(ls: Landscape, kappa: Sequence[int]) -> Fraction:
    """Product of embedded-kernel entries along the history."""
    _check(ls, kappa)
    prob = Fraction(1)
    trap = 0
    for step in kappa:
        row = kernel_row(ls, trap)
        prob *= (row.left, row.stay, row.right)[step + 1]
        trap += step
    return prob


def expected_Y_given_Aplus(ls: Landscape, kappa: Sequence[int]) -> Fraction:
    """|I_f| - 1, where x_{f-1} is the trap the history ends on.

    This is the expected time from x_{f-1}+1 to the next trap; the step off
    x_{f-1} is not counted.
    """
    _check(ls, kappa)
    f = sum(kappa) + 1
    return Fraction(ls.interval(f) - 1)


def contribution(ls: Landscape, kappa: Sequence[int]) -> Fraction:
    return prob_A_kappa(ls, kappa) * expected_Y_given_Aplus(ls, kappa)


def formula_kappa_one(ls: Landscape, c: Fraction, i: int) -> Fraction:
    """Closed form of the all-right contribution for a recursive landscape."""
    c = Fraction(c)
    if i < 1:
        raise ValidationError(f"i must be >= 1, got {i}")
    if i > ls.n_intervals:
        raise ValidationError(f"need {i} intervals, landscape has {ls.n_intervals}")
    if not satisfies_recursion(ls, c, upto=i):
        raise ValidationError("landscape does not follow |I_(j+1)| = c |I_j|^2")
    I1 = ls.intervals[0]
    if i == 1:
        return Fraction(I1 - 1)
    return 2 * I1 * (c / 3) ** (i - 1) * (1 - Fraction(1, ls.interval(i)))


@dataclass(frozen=True)
class BoundCheck:
    kappa: Kappa
    lhs: Fraction
    rhs: Fraction
    bound_kind: str  # "upper" or "lower"

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs if self.bound_kind == "upper" else self.rhs <= self.lhs

    def to_json(self) -> dict:
        return {
            "kappa": list(self.kappa),
            "lhs": format_rational(self.lhs),
            "rhs": format_rational(self.rhs),
            "bound_kind": self.bound_kind,
            "holds": self.holds,
        }


@dataclass(frozen=True)
class BoundsReport:
    checks: tuple[BoundCheck, ...]
    n_sequences: int

    @property
    def violations(self) -> list[BoundCheck]:
        return [chk for chk in self.checks if not chk.holds]

    def to_json(self) -> list[dict]:
        return [chk.to_json() for chk in self.checks]


def _extend_recursion(ls: Landscape, c: Fraction, n: int) -> Landscape:
    """Append recursion lengths until the landscape has n intervals (the wall is dropped)."""
    if ls.n_intervals >= n:
        return ls
    if not ls.intervals:
        raise ValidationError("cannot extend an empty landscape")
    lengths = list(ls.intervals)
    budget = digit_budget()
    while len(lengths) < n:
        nxt = c * lengths[-1] ** 2
        if nxt.denominator != 1:
            raise ValidationError("recursion leaves the integers: c * |I_1| is not natural")
        if nxt.numerator.bit_length() > budget * 3.33:
            raise BudgetExceeded(f"interval {len(lengths) + 1} exceeds the digit budget")
        lengths.append(nxt.numerator)
    return Landscape(tuple(lengths))


def verify_lemma41_bounds(ls: Landscape, c: Fraction, i_max: int = 10) -> BoundsReport:
    """Compare every history's contribution with the all-right one, for i = 1..i_max.

    Upper: contribution <= (2/c)^L (2/(I1^2 c^2))^J * all-right, for every
    admissible history (L zeros, J minus-ones).  Lower, for histories in
    {0,1}^(i-1): contribution >= 1/2 ((2/c)(1 - 1/I1)^2)^L * all-right.

    A landscape shorter than ``i_max`` intervals is extended by the recursion.
    """
    c = Fraction(c)
    if not satisfies_recursion(ls, c, upto=i_max):
        raise ValidationError("landscape does not follow |I_(j+1)| = c |I_j|^2")
    ls = _extend_recursion(ls, c, i_max)
    I1 = ls.intervals[0]
    up_zero = 2 / c
    up_minus = Fraction(2) / (I1 * I1 * c * c)
    low_zero = (2 / c) * (1 - Fraction(1, I1)) ** 2
    checks = []
    count = 0
    for i in range(1, i_max + 1):
        reference = contribution(ls, (1,) * (i - 1))
        for kappa in enumerate_K(i):
            count += 1
            lhs = contribution(ls, kappa)
            L, J = kappa.count(0), kappa.count(-1)
            checks.append(BoundCheck(kappa, lhs, up_zero ** L * up_minus ** J * reference, "upper"))
            if J == 0:
                checks.append(BoundCheck(kappa, lhs, low_zero ** L * reference / 2, "lower"))
    return BoundsReport(tuple(checks), count)
