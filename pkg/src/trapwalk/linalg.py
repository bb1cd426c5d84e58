"""Exact linear solves over the rationals via fraction-free (Bareiss) elimination."""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

from .errors import TrapwalkError


class SingularSystem(TrapwalkError):
    pass


def _integer_rows(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[list[int]]:
    # scale each augmented row by the lcm of its denominators
    rows = []
    for row, rhs in zip(A, b):
        entries = [Fraction(v) for v in row] + [Fraction(rhs)]
        scale = lcm(*(v.denominator for v in entries))
        rows.append([v.numerator * (scale // v.denominator) for v in entries])
    return rows


def solve(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction]:
    """Solve ``A x = b`` exactly.

    Forward elimination is Bareiss' one-step fraction-free scheme on the
    integer-scaled augmented matrix, so intermediate entries stay integers
    (minors of the original matrix).  Back substitution uses Fractions.
    """
    n = len(A)
    if any(len(row) != n for row in A) or len(b) != n:
        raise ValueError("solve expects a square system")
    M = _integer_rows(A, b)
    prev = 1
    for k in range(n):
        pivot = next((r for r in range(k, n) if M[r][k] != 0), None)
        if pivot is None:
            raise SingularSystem(f"matrix is singular (column {k})")
        if pivot != k:
            M[k], M[pivot] = M[pivot], M[k]
        pk = M[k][k]
        for i in range(k + 1, n):
            mik = M[i][k]
            row_i, row_k = M[i], M[k]
            for j in range(k + 1, n + 1):
                # exact division is guaranteed by Sylvester's identity
                row_i[j] = (pk * row_i[j] - mik * row_k[j]) // prev
            row_i[k] = 0
        prev = pk
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(M[i][n])
        for j in range(i + 1, n):
            if M[i][j]:
                acc -= M[i][j] * x[j]
        x[i] = acc / M[i][i]
    return x
