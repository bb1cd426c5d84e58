"""Parsing and formatting of exact rationals.

Rationals cross every external boundary (CLI flags, JSON documents) as
``"num/den"`` strings so no precision is lost.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import ValidationError


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"a/b"``, ``"a"`` or an int into a Fraction.

    Decimal notation ("0.5") is rejected on purpose: every constant in this
    package is meant to be exact.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValidationError(f"cannot parse {text!r} as a rational")
    s = text.strip()
    if "." in s or "e" in s.lower():
        raise ValidationError(f"rational must be written as a/b, got {text!r}")
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            value = Fraction(int(num), int(den))
        else:
            value = Fraction(int(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse {text!r} as a rational") from exc
    return value


def format_rational(value: Fraction | int) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_natural(text: str | int, *, minimum: int = 0, what: str = "value") -> int:
    if isinstance(text, bool):
        raise ValidationError(f"{what} must be an integer")
    try:
        n = int(text)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{what} must be an integer, got {text!r}") from exc
    if n < minimum:
        raise ValidationError(f"{what} must be >= {minimum}, got {n}")
    return n
