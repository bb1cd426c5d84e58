"""Trap landscapes: construction, validation, serialization and comparison.

A landscape is stored as the list of gaps between consecutive traps
(``intervals[j] = x_{j+1} - x_j``) rather than as a site bitmap, because the
recursive family grows doubly exponentially.  There is always a trap at the
origin.  An optional absorbing ``wall`` site to the right of the last trap
truncates the landscape so that exact computations become finite.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from typing import Any

from .errors import BudgetExceeded, ValidationError
from .rational import format_rational, parse_rational

DEFAULT_DIGIT_BUDGET = 100_000
DIGIT_BUDGET_ENV = "TRAPWALK_DIGIT_BUDGET"


def digit_budget() -> int:
    """Decimal-digit cap for big-integer interval lengths (env-overridable)."""
    raw = os.environ.get(DIGIT_BUDGET_ENV)
    if raw is None:
        return DEFAULT_DIGIT_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValidationError(f"{DIGIT_BUDGET_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValidationError(f"{DIGIT_BUDGET_ENV} must be positive")
    return value


@dataclass(frozen=True)
class Landscape:
    intervals: tuple[int, ...]
    wall: int | None = None
    positions: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        intervals = tuple(self.intervals)
        for j, length in enumerate(intervals):
            if isinstance(length, bool) or not isinstance(length, int):
                raise ValidationError(f"interval {j + 1} must be an integer, got {length!r}")
            if length < 1:
                raise ValidationError(f"interval {j + 1} has length {length} < 1")
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "positions", (0, *accumulate(intervals)))
        if self.wall is not None:
            if isinstance(self.wall, bool) or not isinstance(self.wall, int):
                raise ValidationError(f"wall must be an integer, got {self.wall!r}")
            if self.wall <= self.positions[-1]:
                raise ValidationError(
                    f"wall at {self.wall} must lie strictly right of the last trap at {self.positions[-1]}"
                )

    @property
    def n_intervals(self) -> int:
        return len(self.intervals)

    @property
    def n_traps(self) -> int:
        return len(self.intervals) + 1

    @property
    def last_trap(self) -> int:
        return self.positions[-1]

    def interval(self, i: int) -> int:
        """Length |I_i| (1-based, matching the usual trap numbering)."""
        if not 1 <= i <= len(self.intervals):
            raise ValidationError(f"interval index {i} out of range 1..{len(self.intervals)}")
        return self.intervals[i - 1]

    def require_wall(self) -> int:
        if self.wall is None:
            raise ValidationError("wall required for this computation")
        return self.wall

    def with_wall(self, wall: int | None) -> Landscape:
        return Landscape(self.intervals, wall)

    def trap_set(self) -> frozenset[int]:
        return frozenset(self.positions)

    def to_json(self) -> dict[str, Any]:
        return {
            "intervals": [str(n) for n in self.intervals],
            "wall": None if self.wall is None else str(self.wall),
        }

    @classmethod
    def from_json(cls, doc: Any) -> Landscape:
        if not isinstance(doc, dict) or "intervals" not in doc:
            raise ValidationError("landscape document must be an object with an 'intervals' list")
        raw = doc["intervals"]
        if not isinstance(raw, list):
            raise ValidationError("'intervals' must be a list of decimal strings")
        intervals = []
        for item in raw:
            if not isinstance(item, str) or not item.isdigit():
                raise ValidationError(f"interval lengths must be decimal strings, got {item!r}")
            intervals.append(int(item))
        wall = doc.get("wall")
        if wall is not None:
            if not isinstance(wall, str) or not wall.isdigit():
                raise ValidationError(f"wall must be a decimal string or null, got {wall!r}")
            wall = int(wall)
        return cls(tuple(intervals), wall)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, text: str) -> Landscape:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"landscape file is not valid JSON: {exc}") from exc
        return cls.from_json(doc)


def from_positions(positions: list[int] | tuple[int, ...], wall: int | None = None) -> Landscape:
    """Build a landscape from explicit trap sites (must start at 0)."""
    positions = list(positions)
    if not positions or positions[0] != 0:
        raise ValidationError("trap positions must start with the origin")
    return Landscape(tuple(b - a for a, b in zip(positions, positions[1:])), wall)


# ---------------------------------------------------------------- recursion


@dataclass(frozen=True)
class CValidity:
    valid: bool
    product: Fraction  # c * I1, reduced

    @property
    def m(self) -> int | None:
        return self.product.numerator if self.valid else None


def validate_c(I1: int, c: Fraction | str | int) -> CValidity:
    """Check that ``c * I1`` is a natural number.

    Only then do all lengths of the squaring recursion stay integral.
    """
    c = parse_rational(c)
    if I1 < 1:
        raise ValidationError(f"I1 must be >= 1, got {I1}")
    if c <= 0:
        raise ValidationError(f"c must be positive, got {format_rational(c)}")
    product = c * I1
    return CValidity(product.denominator == 1, product)


@dataclass(frozen=True)
class RecursionParams:
    I1: int
    c: Fraction
    n_intervals: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", parse_rational(self.c))
        if self.n_intervals < 1:
            raise ValidationError(f"n_intervals must be >= 1, got {self.n_intervals}")
        verdict = validate_c(self.I1, self.c)
        if not verdict.valid:
            raise ValidationError(
                f"c*I1 = {format_rational(verdict.product)} is not a natural number"
            )

    @property
    def m(self) -> int:
        return (self.c * self.I1).numerator

    @property
    def growing(self) -> bool:
        """True when c > 1/I1, i.e. the lengths increase strictly."""
        return self.m >= 2


def length_digits(params: RecursionParams, n: int) -> float:
    """Approximate number of decimal digits of |I_n|, without computing it."""
    if params.m == 1 or n == 1:
        return math.log10(params.I1) + 1
    if n - 1 > 64:
        return math.inf
    return (2 ** (n - 1)) * math.log10(params.m) - math.log10(params.c) + 1


def closed_form_length(params: RecursionParams, n: int) -> int:
    """|I_n| = c^(2^(n-1) - 1) * I1^(2^(n-1)), evaluated independently of the recursion."""
    e = 2 ** (n - 1)
    value = params.c ** (e - 1) * Fraction(params.I1) ** e
    if value.denominator != 1:
        raise ValidationError(f"|I_{n}| is not integral for these parameters")
    return value.numerator


def generate_recursive(params: RecursionParams, budget: int | None = None) -> Landscape:
    """Lengths I1, c*I1^2, c*(c*I1^2)^2, ... (no wall).

    Every generated length is checked against the closed form.
    """
    budget = digit_budget() if budget is None else budget
    if length_digits(params, params.n_intervals) > budget:
        raise BudgetExceeded(
            f"|I_{params.n_intervals}| would have more than {budget} decimal digits"
        )
    lengths = [params.I1]
    for _ in range(params.n_intervals - 1):
        nxt = params.c * lengths[-1] ** 2
        lengths.append(nxt.numerator)  # integral by validate_c
    for j, length in enumerate(lengths, start=1):
        if length != closed_form_length(params, j):
            raise AssertionError(f"recursion and closed form disagree at interval {j}")
    return Landscape(tuple(lengths))


def satisfies_recursion(ls: Landscape, c: Fraction, upto: int | None = None) -> bool:
    upto = ls.n_intervals if upto is None else min(upto, ls.n_intervals)
    return all(ls.intervals[j] == c * ls.intervals[j - 1] ** 2 for j in range(1, upto))


# ---------------------------------------------------------------- tail ops


def tail_similar(a: Landscape, b: Landscape) -> tuple[int, int] | None:
    """Site offsets (p_a, p_b) aligning the two interval lists, or None.

    With finite encodings the shorter list must be a suffix of the longer
    one; the offsets are the positions of the traps where the common suffix
    starts.  Walls are ignored.
    """
    la, lb = a.n_intervals, b.n_intervals
    if la >= lb:
        if a.intervals[la - lb:] == b.intervals:
            return a.positions[la - lb], 0
        return None
    if b.intervals[lb - la:] == a.intervals:
        return 0, b.positions[lb - la]
    return None


def shift_tail(a: Landscape, k: int) -> Landscape:
    """Drop the first k-1 intervals, so that trap x_{k-1} becomes the origin."""
    if not 1 <= k <= a.n_intervals:
        raise ValidationError(f"shift index {k} out of range 1..{a.n_intervals}")
    wall = None if a.wall is None else a.wall - a.positions[k - 1]
    return Landscape(a.intervals[k - 1:], wall)


def insert_site(a: Landscape, k: int) -> Landscape:
    """Lengthen interval k by one site; everything right of it (wall included) moves by one."""
    if not 1 <= k <= a.n_intervals:
        raise ValidationError(f"interval index {k} out of range 1..{a.n_intervals}")
    intervals = list(a.intervals)
    intervals[k - 1] += 1
    return Landscape(tuple(intervals), None if a.wall is None else a.wall + 1)
