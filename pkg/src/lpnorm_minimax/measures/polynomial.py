"""Dense univariate polynomials over exact rationals (or any field-like numbers)."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


def _trim(coeffs: list) -> list:
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs or [Fraction(0)]


class Polynomial:
    """Polynomial ``sum(a_j x**j)`` with coefficients stored lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        self.coeffs = tuple(_trim(list(coeffs)))

    @classmethod
    def monomial(cls, k: int, c=Fraction(1)) -> "Polynomial":
        return cls([Fraction(0)] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self):
        return f"Polynomial({[str(c) for c in self.coeffs]})"

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return Polynomial([x + y for x, y in zip(a, b)])

    def __neg__(self) -> "Polynomial":
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def scale(self, c) -> "Polynomial":
        return Polynomial([c * a for a in self.coeffs])

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([Fraction(0)])
        return Polynomial([j * c for j, c in enumerate(self.coeffs)][1:])

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = [Fraction(c) for c in self.coeffs]
        lead = Fraction(other.coeffs[-1])
        dq = other.degree
        quot = [Fraction(0)] * max(1, len(rem) - dq)
        for k in range(len(rem) - 1 - dq, -1, -1):
            c = rem[k + dq] / lead
            quot[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
        return Polynomial(quot), Polynomial(rem[:dq] if dq > 0 else [Fraction(0)])

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "Polynomial":
        return self.scale(Fraction(1) / Fraction(self.coeffs[-1]))


def gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def integrate_monomials(coeffs: Sequence, lo, hi, shift: int = 0):
    """Exact ``int_lo^hi x**shift * P(x) dx`` for rational endpoints."""
    total = Fraction(0)
    for j, c in enumerate(coeffs):
        k = j + shift + 1
        total += Fraction(c) * (Fraction(hi) ** k - Fraction(lo) ** k) / k
    return total
