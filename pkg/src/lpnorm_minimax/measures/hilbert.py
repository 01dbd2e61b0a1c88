"""Exact solves with the Hilbert matrix ``[1/(i+j+1)]_{i,j=0..s}``."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def hilbert_matrix(s: int) -> list[list[Fraction]]:
    return [[Fraction(1, i + j + 1) for j in range(s + 1)] for i in range(s + 1)]


def hilbert_inverse_apply(s: int, rhs: Sequence) -> list[Fraction]:
    """Return ``x`` with ``H_s x = rhs`` computed by Gauss-Jordan elimination
    over the rationals.

    Examples
    --------
    >>> hilbert_inverse_apply(1, [1, 0])
    [Fraction(4, 1), Fraction(-6, 1)]
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if len(rhs) != s + 1:
        raise ValueError(f"rhs must have length {s + 1}")
    n = s + 1
    aug = [row + [Fraction(b)] for row, b in zip(hilbert_matrix(s), rhs)]
    for col in range(n):
        # Hilbert matrices are positive definite, so the diagonal pivot is nonzero.
        piv = aug[col][col]
        inv = 1 / piv
        aug[col] = [v * inv for v in aug[col]]
        for row in range(n):
            if row != col and aug[row][col]:
                f = aug[row][col]
                aug[row] = [a - f * b for a, b in zip(aug[row], aug[col])]
    return [aug[i][n] for i in range(n)]


def hilbert_matvec(s: int, x: Sequence) -> list[Fraction]:
    return [sum((Fraction(1, i + j + 1) * Fraction(x[j]) for j in range(s + 1)), Fraction(0))
            for i in range(s + 1)]


def inverse_diagonal(s: int, t: int) -> Fraction:
    """``[H_s^{-1}]_{t,t}`` (zero-based index)."""
    e = [Fraction(0)] * (s + 1)
    e[t] = Fraction(1)
    return hilbert_inverse_apply(s, e)[t]
