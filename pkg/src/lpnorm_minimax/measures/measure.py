"""Probability measures on [0, 1] made of atoms and piecewise densities.

A density piece is ``poly(x) + sum(c * x**a * ln(x)**k)`` on ``[lo, hi]``. All
integrals against powers of ``x`` have closed-form antiderivatives, which are
evaluated exactly (rationals) when possible and in extended precision
otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath as mp
import numpy as np

from .polynomial import Polynomial

WORK_DPS = 60


def to_mp(x):
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


@dataclass(frozen=True)
class Term:
    """``coef * x**power * ln(x)**log_power``."""

    coef: object
    power: object
    log_power: int = 0

    def scaled(self, c) -> "Term":
        return Term(self.coef * c, self.power, self.log_power)

    def times_power(self, z) -> "Term":
        return Term(self.coef, self.power + z, self.log_power)

    def times(self, other: "Term") -> "Term":
        return Term(self.coef * other.coef, self.power + other.power,
                    self.log_power + other.log_power)

    def value_mp(self, x):
        x = to_mp(x)
        if x == 0:
            if self.power == 0 and self.log_power == 0:
                return to_mp(self.coef)
            return mp.mpf(0)
        return to_mp(self.coef) * x ** to_mp(self.power) * mp.log(x) ** self.log_power


def _is_exact(*vals) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in vals)


def term_antiderivative_mp(term: Term, x):
    """Antiderivative of ``x**power * ln(x)**k`` (without coef) vanishing at 0."""
    w = to_mp(term.power) + 1
    if w <= 0:
        raise ValueError(f"non-integrable power {term.power} at 0")
    x = to_mp(x)
    if x == 0:
        return mp.mpf(0)
    k = term.log_power
    lx = mp.log(x)
    acc = mp.mpf(0)
    fall = mp.mpf(1)
    for i in range(k + 1):
        # k!/(k-i)! * (-1)^i * ln(x)^(k-i) / w^(i+1)
        acc += (-1) ** i * fall * lx ** (k - i) / w ** (i + 1)
        fall *= (k - i)
    return x ** w * acc


def integrate_term(term: Term, lo, hi):
    """``int_lo^hi term(x) dx``; exact Fraction when every input is rational."""
    if term.log_power == 0 and _is_exact(term.coef, lo, hi) and _is_int(term.power):
        k = int(term.power) + 1
        if k <= 0:
            raise ValueError("non-integrable power")
        return Fraction(term.coef) * (Fraction(hi) ** k - Fraction(lo) ** k) / k
    return to_mp(term.coef) * (term_antiderivative_mp(term, hi) - term_antiderivative_mp(term, lo))


@dataclass(frozen=True)
class DensityPiece:
    lo: object
    hi: object
    poly: Polynomial
    extra: tuple = ()

    def terms(self) -> list[Term]:
        out = [Term(c, j, 0) for j, c in enumerate(self.poly.coeffs) if c != 0]
        return out + list(self.extra)

    def value_mp(self, x):
        x = to_mp(x)
        v = mp.mpf(0)
        for c in reversed(self.poly.coeffs):
            v = v * x + to_mp(c)
        for t in self.extra:
            v += t.value_mp(x)
        return v

    def integral(self, weight: Sequence[Term] = (Term(Fraction(1), 0, 0),)):
        total = 0
        for t in self.terms():
            for w in weight:
                total = total + integrate_term(t.times(w), self.lo, self.hi)
        return total

    @property
    def is_rational(self) -> bool:
        return not self.extra and _is_exact(self.lo, self.hi, *self.poly.coeffs)


@dataclass(frozen=True)
class MomentMeasure:
    """Atoms ``(location, mass)`` plus density pieces; total mass one."""

    atoms: tuple = ()
    pieces: tuple = ()
    label: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def is_rational(self) -> bool:
        return all(_is_exact(a, m) for a, m in self.atoms) and all(p.is_rational for p in self.pieces)

    def integrate_terms(self, weight: Sequence[Term]):
        """``int sum(weight)(x) pi(dx)`` over atoms and pieces."""
        with mp.workdps(WORK_DPS):
            total = 0
            for loc, mass in self.atoms:
                for w in weight:
                    if self.is_rational and _is_exact(loc, mass, w.coef) and w.log_power == 0 \
                            and _is_int(w.power):
                        total = total + Fraction(mass) * Fraction(w.coef) * Fraction(loc) ** int(w.power)
                    else:
                        total = total + to_mp(mass) * w.value_mp(loc)
            for piece in self.pieces:
                total = total + piece.integral(weight)
            return total

    def total_mass(self):
        return self.integrate_terms([Term(Fraction(1), 0)])

    def moment_exact(self, k: int) -> Fraction:
        if not self.is_rational or not _is_int(k):
            raise ValueError("exact moments need a rational measure and an integer order")
        return self.integrate_terms([Term(Fraction(1), int(k))])

    def moment_mp(self, z):
        with mp.workdps(WORK_DPS):
            if _is_int(z) and self.is_rational:
                return to_mp(self.moment_exact(int(z)))
            if _is_int(z):
                z = int(z)
            elif not isinstance(z, Fraction):
                z = to_mp(z)
            return to_mp(self.integrate_terms([Term(Fraction(1), z)]))

    def min_piece_value(self, samples: int = 33):
        """Smallest density value over Chebyshev nodes and endpoints of every piece."""
        worst = mp.inf
        with mp.workdps(WORK_DPS):
            for piece in self.pieces:
                lo, hi = to_mp(piece.lo), to_mp(piece.hi)
                nodes = [lo, hi] + [lo + (hi - lo) * (1 - mp.cos(mp.pi * (2 * i + 1) / (2 * samples))) / 2
                                    for i in range(samples)]
                for x in nodes:
                    worst = min(worst, piece.value_mp(x))
        return worst

    def sampler(self) -> "MeasureSampler":
        if "sampler" not in self._cache:
            self._cache["sampler"] = MeasureSampler(self)
        return self._cache["sampler"]


def _is_int(z) -> bool:
    if isinstance(z, (int, np.integer)):
        return True
    if isinstance(z, Fraction):
        return z.denominator == 1
    if isinstance(z, float):
        return z.is_integer()
    return False


def moment(m: MomentMeasure, z) -> float:
    """``int x**z m(dx)`` as a float (computed in extended precision)."""
    if z < 0:
        raise ValueError("moment order must be >= 0")
    return float(m.moment_mp(z))


def moment_exact(m: MomentMeasure, k: int) -> Fraction:
    return m.moment_exact(k)


def point_mass(loc=Fraction(1), mass=Fraction(1)) -> MomentMeasure:
    return MomentMeasure(atoms=((Fraction(loc), Fraction(mass)),))


def uniform() -> MomentMeasure:
    return MomentMeasure(pieces=(DensityPiece(Fraction(0), Fraction(1), Polynomial([Fraction(1)])),))


def mixture(weights: Iterable, measures: Iterable[MomentMeasure]) -> MomentMeasure:
    atoms, pieces = [], []
    for w, m in zip(weights, measures):
        w = Fraction(w) if isinstance(w, (int, Fraction)) else w
        atoms += [(loc, mass * w) for loc, mass in m.atoms]
        pieces += [DensityPiece(p.lo, p.hi, p.poly.scale(w), tuple(t.scaled(w) for t in p.extra))
                   for p in m.pieces]
    return MomentMeasure(tuple(atoms), tuple(pieces))


class MeasureSampler:
    """Float sampler: components by mass, rejection within density pieces."""

    def __init__(self, m: MomentMeasure, grid: int = 257):
        self.locs = np.array([float(a) for a, _ in m.atoms])
        masses = [float(to_mp(w)) for _, w in m.atoms]
        self.pieces = []
        for piece in m.pieces:
            lo, hi = float(piece.lo), float(piece.hi)
            mass = float(piece.integral())
            if mass <= 0:
                continue
            xs = lo + (hi - lo) * (1 - np.cos(np.linspace(0, np.pi, grid))) / 2
            vals = np.array([float(piece.value_mp(x)) for x in xs])
            shifted = _shifted_coeffs(piece)
            self.pieces.append((lo, hi, shifted, piece, 1.25 * vals.max() + 1e-300))
            masses.append(mass)
        masses = np.array(masses)
        self.probs = masses / masses.sum()

    def _piece_density(self, k: int, x: np.ndarray) -> np.ndarray:
        lo, hi, shifted, piece, _ = self.pieces[k]
        if shifted is not None:
            y = (x - lo) / (hi - lo)
            return np.polynomial.polynomial.polyval(y, shifted)
        return np.array([float(piece.value_mp(v)) for v in x])

    def draw(self, size: int, rng: np.random.Generator) -> np.ndarray:
        comp = rng.choice(len(self.probs), size=size, p=self.probs)
        out = np.empty(size)
        na = len(self.locs)
        for k in range(na):
            out[comp == k] = self.locs[k]
        for j in range(len(self.pieces)):
            idx = np.flatnonzero(comp == na + j)
            out[idx] = self._draw_piece(j, idx.size, rng)
        return out

    def _draw_piece(self, k: int, size: int, rng) -> np.ndarray:
        lo, hi, _, _, bound = self.pieces[k]
        got = np.empty(0)
        tries = 0
        while got.size < size:
            tries += 1
            if tries > 10_000:
                raise RuntimeError("rejection sampling did not terminate")
            want = max(16, int(2.5 * (size - got.size)))
            x = rng.uniform(lo, hi, want)
            dens = self._piece_density(k, x)
            if np.any(dens > bound):
                raise RuntimeError("rejection envelope violated; density bound too small")
            keep = x[rng.uniform(0, bound, want) < dens]
            got = np.concatenate([got, keep])
        return got[:size]


def _shifted_coeffs(piece: DensityPiece):
    """Coefficients of ``y -> poly(lo + (hi-lo) y)`` as floats, or None if not polynomial."""
    if piece.extra:
        return None
    lo, h = piece.lo, piece.hi - piece.lo
    out = [0] * (piece.poly.degree + 1)
    # expand (lo + h y)^j with exact or mp arithmetic
    for j, c in enumerate(piece.poly.coeffs):
        for i in range(j + 1):
            out[i] += c * math.comb(j, i) * lo ** (j - i) * h ** i
    return np.array([float(v) for v in out])
