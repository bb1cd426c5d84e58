"""Certified finite / infinite classification of E(tau) for recursive landscapes.

Two exact rational tests are applied to the k-th interval length |I_k| of the
squaring recursion, for k = 1, 2, ...:

* finiteness holds when ``c^2 I^2 - c I^2 + 2 < 0``;
* divergence holds when ``c >= 3 - 2 (1 - 1/I)^2``.

Finiteness of E(tau) only depends on the tail of the landscape, so the first
k at which either test fires decides the whole landscape.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import ValidationError
from .landscape import RecursionParams, digit_budget
from .rational import format_rational, parse_rational

DEFAULT_MAX_SHIFT = 64
# extra margin (natural log units) when a test is decided in log space
LOG_MARGIN = mpmath.mpf(1)


def _digits(n: int) -> int:
    # cheap upper estimate of the decimal digit count
    return n.bit_length() * 30103 // 100000 + 1


def upper_condition(I: int, c: Fraction) -> bool:
    c = parse_rational(c)
    return c * c * I * I - c * I * I + 2 < 0


def lower_condition(I: int, c: Fraction) -> bool:
    c = parse_rational(c)
    return c >= 3 - 2 * (1 - Fraction(1, I)) ** 2


def upper_series_ratio(I: int, c: Fraction) -> Fraction:
    """Ratio of the geometric series bounding E(tau) from above."""
    c = parse_rational(c)
    return (1 + 2 / c + Fraction(2) / (c * c * I * I)) * (c / 3)


def lower_series_ratio(I: int, c: Fraction) -> Fraction:
    """Ratio of the geometric series bounding E(tau) from below."""
    c = parse_rational(c)
    return (2 / c * (1 - Fraction(1, I)) ** 2 + 1) * (c / 3)


def _log_upper(log_I: mpmath.mpf, c: Fraction) -> bool:
    # c^2 I^2 - c I^2 + 2 < 0  <=>  c < 1 and I^2 > 2 / (c - c^2)
    if c >= 1:
        return False
    threshold = mpmath.log(mpmath.mpf(2) / (mpmath.mpf(c.numerator) / c.denominator
                                             * (1 - mpmath.mpf(c.numerator) / c.denominator))) / 2
    return log_I > threshold + LOG_MARGIN


def _log_lower(log_I: mpmath.mpf, c: Fraction) -> bool:
    # sufficient: 4/I <= c - 1, since 3 - 2(1-1/I)^2 = 1 + 4/I - 1/I^2
    if c <= 1:
        return False
    return log_I > mpmath.log(4 / (mpmath.mpf(c.numerator) / c.denominator - 1)) + LOG_MARGIN


@dataclass
class CriticalityReport:
    verdict: str  # "finite" | "infinite" | "indeterminate"
    witness_shift: int | None
    ratio_upper: Fraction | None
    ratio_lower: Fraction | None
    reason: str = ""
    conditions_evaluated: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        fmt = lambda r: None if r is None else format_rational(r)  # noqa: E731
        return {
            "verdict": self.verdict,
            "witness_shift": self.witness_shift,
            "ratio_upper": fmt(self.ratio_upper),
            "ratio_lower": fmt(self.ratio_lower),
            "reason": self.reason,
            "conditions_evaluated": self.conditions_evaluated,
        }


def classify(params: RecursionParams, max_shift: int = DEFAULT_MAX_SHIFT) -> CriticalityReport:
    c = params.c
    if not params.growing:
        return CriticalityReport("indeterminate", None, None, None, "non-growing recursion")
    if c == 1:
        # thresholds approach 1 from both sides but never reach it
        return CriticalityReport(
            "indeterminate", None, upper_series_ratio(params.I1, c), lower_series_ratio(params.I1, c),
            "c = 1: boundary case, neither test can fire",
        )
    budget = digit_budget()
    evaluated: list[dict] = []
    length: int | None = params.I1
    log_len = mpmath.log(params.I1)
    log_c = mpmath.log(mpmath.mpf(c.numerator) / c.denominator)
    for k in range(1, max_shift + 1):
        if length is not None:
            up, low = upper_condition(length, c), lower_condition(length, c)
            r_up, r_low = upper_series_ratio(length, c), lower_series_ratio(length, c)
            evaluated.append({"k": k, "length": str(length), "upper": up, "lower": low})
        else:
            up, low = _log_upper(log_len, c), _log_lower(log_len, c)
            r_up = r_low = None
            evaluated.append({"k": k, "log10_length": float(log_len / mpmath.log(10)),
                              "upper": up, "lower": low})
        if up:
            return CriticalityReport("finite", k, r_up, r_low, "upper test fired", evaluated)
        if low:
            return CriticalityReport("infinite", k, r_up, r_low, "lower test fired", evaluated)
        log_len = log_c + 2 * log_len
        if length is not None:
            nxt = c * length * length
            length = nxt.numerator if _digits(nxt.numerator) <= budget else None
    return CriticalityReport("indeterminate", None, None, None,
                             f"no test fired within {max_shift} shifts", evaluated)


@dataclass(frozen=True)
class UpperSeriesBound:
    shift: int          # tail index k whose |I_k| plays the role of I1
    first_length: int
    ratio: Fraction
    bound: Fraction     # closed form 2 |I_k| / (1 - ratio)
    partial_sum: Fraction

    def to_json(self) -> dict:
        return {
            "shift": self.shift,
            "first_length": str(self.first_length),
            "ratio": format_rational(self.ratio),
            "bound": format_rational(self.bound),
            "partial_sum": format_rational(self.partial_sum),
        }


def upper_series_bound_at(I: int, c: Fraction, i_max: int = 10) -> UpperSeriesBound:
    """2 I sum_i r^(i-1) for a recursive landscape starting with |I_1| = I."""
    c = parse_rational(c)
    r = upper_series_ratio(I, c)
    if r >= 1:
        raise ValidationError(f"series ratio {format_rational(r)} >= 1: geometric series diverges")
    partial = sum((2 * I * r ** (i - 1) for i in range(1, i_max + 1)), Fraction(0))
    return UpperSeriesBound(1, I, r, 2 * I / (1 - r), partial)


def series_bound_upper(params: RecursionParams, i_max: int = 10,
                       max_shift: int = DEFAULT_MAX_SHIFT) -> UpperSeriesBound:
    """Upper bound on E(tau) of the tail starting at the first shift where the ratio is < 1.

    The bound applies to the landscape shifted by ``shift - 1`` intervals
    (which has the same finiteness verdict as the original).
    """
    c = params.c
    length = params.I1
    budget = digit_budget()
    for k in range(1, max_shift + 1):
        if upper_series_ratio(length, c) < 1:
            res = upper_series_bound_at(length, c, i_max)
            return UpperSeriesBound(k, length, res.ratio, res.bound, res.partial_sum)
        if c >= 1:
            break
        length = (c * length * length).numerator
        if _digits(length) > budget:
            break
    raise ValidationError("series ratio never drops below 1: no finite upper bound")


def series_bound_lower_diverges(params: RecursionParams) -> bool:
    """True when the lower geometric series at I1 has ratio >= 1."""
    return lower_series_ratio(params.I1, params.c) >= 1
