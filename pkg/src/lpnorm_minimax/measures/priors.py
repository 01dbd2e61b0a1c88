"""Pairs of probability measures on [0, 1] with matched moments.

Both constructions put half of the mass at 1 so every moment is at least 1/2,
and split a signed density orthogonal to low-degree polynomials into its
positive and negative parts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from .hilbert import hilbert_inverse_apply
from .measure import (WORK_DPS, DensityPiece, MomentMeasure, Term, integrate_term, moment,
                      to_mp)
from .polynomial import Polynomial
from .remez import best_poly_approx
from .sturm import isolate_roots
from .targets import TargetFunction

MIN_PIECE = 1e-13
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class MeasurePair:
    mu: MomentMeasure
    nu: MomentMeasure
    matched_upto: int
    mismatch_index: int | None
    gap: float
    certificate: dict = field(default_factory=dict, compare=False)

    def e_star(self, z: float) -> float:
        return max(moment(self.mu, z), moment(self.nu, z))

    def e_low(self, z: float) -> float:
        return min(moment(self.mu, z), moment(self.nu, z))


def identical_pair(m: MomentMeasure) -> MeasurePair:
    """Degenerate pair ``(m, m)``; useful as a null control."""
    return MeasurePair(m, m, 10**9, None, 0.0, {"degenerate": True})


def _merge_breakpoints(points: list, min_len: float = MIN_PIECE) -> list:
    out = [points[0]]
    for p in points[1:-1]:
        if float(p - out[-1]) >= min_len:
            out.append(p)
    if float(points[-1] - out[-1]) < min_len and len(out) > 1:
        out.pop()
    out.append(points[-1])
    return out


def _split_signed(breaks, sign_at, make_piece):
    """Group consecutive sub-intervals by sign; returns (pos_pieces, neg_pieces)."""
    pos, neg = [], []
    runs = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        sgn = sign_at((lo + hi) / 2)
        if runs and runs[-1][2] == sgn:
            runs[-1][1] = hi
        else:
            runs.append([lo, hi, sgn])
    for lo, hi, sgn in runs:
        if sgn > 0:
            pos.append(make_piece(lo, hi, 1))
        elif sgn < 0:
            neg.append(make_piece(lo, hi, -1))
    return pos, neg, runs


def factorial_constant(s: int, t: int) -> float:
    """``sqrt(2t-1) ((t-1)!)^2 (s-t)! / (s+t-1)!``."""
    return math.sqrt(2 * t - 1) * math.factorial(t - 1) ** 2 * math.factorial(s - t) / math.factorial(s + t - 1)


def build_pair_prop1(s: int, t: int) -> MeasurePair:
    """Measures whose moments of order ``1..s`` agree except at ``t``.

    ``P`` solves ``H_s a = e_t`` so that ``int P x^k = [k == t]``; ``mu`` and
    ``nu`` carry ``P+/||P||_1`` and ``P-/||P||_1`` plus ``delta_1/2``, hence
    ``e_mu(t) - e_nu(t) = 1/||P||_1``.
    """
    if not (isinstance(s, int) and isinstance(t, int)) or not (1 < t <= s):
        raise ValueError(f"need integers with 1 < t <= s, got s={s}, t={t}")
    rhs = [Fraction(0)] * (s + 1)
    rhs[t] = Fraction(1)
    a = hilbert_inverse_apply(s, rhs)
    P = Polynomial(a)
    roots = isolate_roots(P, Fraction(0), Fraction(1))
    breaks = _merge_breakpoints([Fraction(0)] + roots + [Fraction(1)])
    signed = []

    def make(lo, hi, sgn):
        signed.append((lo, hi, sgn))
        return (lo, hi, sgn)

    _split_signed(breaks, lambda x: (P(x) > 0) - (P(x) < 0), make)
    l1 = sum((sgn * integrate_term(Term(c, j), lo, hi)
              for lo, hi, sgn in signed for j, c in enumerate(a)), Fraction(0))
    inv_z = 1 / l1
    mu_pieces = tuple(DensityPiece(lo, hi, P.scale(inv_z)) for lo, hi, sgn in signed if sgn > 0)
    nu_pieces = tuple(DensityPiece(lo, hi, P.scale(-inv_z)) for lo, hi, sgn in signed if sgn < 0)
    mu = MomentMeasure(((Fraction(1), HALF),), mu_pieces, label=f"prop1-mu(s={s},t={t})")
    nu = MomentMeasure(((Fraction(1), HALF),), nu_pieces, label=f"prop1-nu(s={s},t={t})")
    gap = mu.moment_exact(t) - nu.moment_exact(t)
    diffs = {k: mu.moment_exact(k) - nu.moment_exact(k) for k in range(0, s + 1)}
    c_fact = factorial_constant(s, t)
    cert = {
        "coefficients": a,
        "roots": roots,
        "l1_norm": l1,
        "gap_exact": gap,
        "gap_times_l1": gap * l1,
        "moment_differences": diffs,
        "inverse_diagonal": a[t],
        "gap_lower_bound": float(a[t]) ** -0.5,
        "factorial_constant": c_fact,
        "factorial_constant_inverse_square": c_fact ** -2,
        "mass_mu": mu.total_mass(),
        "mass_nu": nu.total_mass(),
        "min_density": float(min(mu.min_piece_value(), nu.min_piece_value())),
    }
    return MeasurePair(mu, nu, s, t, float(gap), cert)


def _bisect_root(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < mp.mpf(2) ** (-3.3 * mp.mp.dps):
            break
    return (lo + hi) / 2


def build_pair_prop2(S: TargetFunction, s: int, scan: int = 4000) -> MeasurePair:
    """Measures with equal moments ``0..s`` and different integrals of ``S``.

    With ``c_k = int S x^k``, ``kappa = c' H_s^{-1} c - int S^2 < 0``,
    ``b = varpi/kappa`` and ``a = b H_s^{-1} c`` the density
    ``K = P_a - b S`` is orthogonal to polynomials of degree ``s`` and
    ``int K S = varpi``. Splitting ``K`` by sign gives the pair, whose
    ``S``-gap is ``varpi / ||K||_1``.
    """
    if not S.terms:
        raise ValueError("build_pair_prop2 needs a target with a term representation")
    fit = best_poly_approx(S, s)
    if fit.varpi <= 0:
        raise ValueError(f"{S.name} is a polynomial of degree <= {s}; varpi = 0")
    with mp.workdps(WORK_DPS):
        c = [S.moment(k) for k in range(s + 1)]
        exact = all(isinstance(v, Fraction) for v in c)
        if exact:
            hc = hilbert_inverse_apply(s, c)
            kappa = sum((ci * hi for ci, hi in zip(c, hc)), Fraction(0)) - S.l2_squared()
        else:
            c = [to_mp(v) for v in c]
            H = mp.matrix([[mp.mpf(1) / (i + j + 1) for j in range(s + 1)] for i in range(s + 1)])
            hc = list(mp.lu_solve(H, mp.matrix(c)))
            kappa = mp.fsum(ci * hi for ci, hi in zip(c, hc)) - to_mp(S.l2_squared())
        if not to_mp(kappa) < -mp.mpf(10) ** (-(WORK_DPS - 10)):
            raise ValueError(f"kappa_s(S) = {mp.nstr(to_mp(kappa), 5)} is not negative; "
                             "S is indistinguishable from a polynomial at working precision")
        varpi = Fraction(fit.varpi) if exact else to_mp(fit.varpi)
        b = varpi / kappa
        a = [b * h for h in hc]
        a_mp = [to_mp(v) for v in a]
        b_mp = to_mp(b)
        s_terms = [t.scaled(-b) for t in S.terms]

        def K(x):
            v = mp.mpf(0)
            for coef in reversed(a_mp):
                v = v * x + coef
            return v - b_mp * S.value_mp(x)

        xs = [(1 - mp.cos(mp.pi * i / scan)) / 2 for i in range(scan + 1)]
        vals = [K(x) for x in xs]
        roots = []
        for i in range(1, scan + 1):
            if vals[i] == 0 and 0 < i < scan:
                roots.append(xs[i])
            elif vals[i - 1] * vals[i] < 0:
                roots.append(_bisect_root(K, xs[i - 1], xs[i]))
        breaks = [mp.mpf(0)] + sorted(set(roots)) + [mp.mpf(1)]
        breaks = _merge_breakpoints(breaks)

        def piece_integral(lo, hi, weight=(Term(Fraction(1), 0),)):
            tot = mp.mpf(0)
            for w in weight:
                for j, coef in enumerate(a):
                    tot += to_mp(integrate_term(Term(coef, j).times(w), lo, hi))
                for t in s_terms:
                    tot += to_mp(integrate_term(t.times(w), lo, hi))
            return tot

        signed = []
        _split_signed(breaks, lambda x: (K(x) > 0) - (K(x) < 0),
                      lambda lo, hi, sgn: signed.append((lo, hi, sgn)))
        l1 = mp.fsum(sgn * piece_integral(lo, hi) for lo, hi, sgn in signed)
        inv_z = 1 / l1

        def piece(lo, hi, sgn):
            f = inv_z * sgn
            poly = Polynomial([to_mp(v) * f for v in a])
            extra = tuple(Term(to_mp(t.coef) * f, t.power, t.log_power) for t in s_terms)
            return DensityPiece(lo, hi, poly, extra)

        mu_pieces = tuple(piece(lo, hi, 1) for lo, hi, sgn in signed if sgn > 0)
        nu_pieces = tuple(piece(lo, hi, -1) for lo, hi, sgn in signed if sgn < 0)
        half = mp.mpf(1) / 2
        mu = MomentMeasure(((mp.mpf(1), half),), mu_pieces, label=f"prop2-mu({S.name},s={s})")
        nu = MomentMeasure(((mp.mpf(1), half),), nu_pieces, label=f"prop2-nu({S.name},s={s})")
        s_weight = list(S.terms)
        s_gap = to_mp(mu.integrate_terms(s_weight)) - to_mp(nu.integrate_terms(s_weight))
        diffs = {k: to_mp(mu.moment_mp(k)) - to_mp(nu.moment_mp(k)) for k in range(0, s + 1)}
        int_ks = mp.fsum(piece_integral(lo, hi, s_weight) for lo, hi, _ in signed)
        cert = {
            "varpi": fit.varpi,
            "kappa": float(to_mp(kappa)),
            "b": float(b_mp),
            "coefficients": [float(v) for v in a_mp],
            "roots": [float(r) for r in breaks[1:-1]],
            "l1_norm": float(l1),
            "int_K_S": float(int_ks),
            "s_gap": float(s_gap),
            "s_gap_predicted": float(to_mp(varpi) / l1),
            "max_moment_difference": float(max(abs(v) for v in diffs.values())),
            "moment_differences": {k: float(v) for k, v in diffs.items()},
            "mass_mu": float(mu.total_mass()),
            "mass_nu": float(nu.total_mass()),
            "min_density": float(min(mu.min_piece_value(), nu.min_piece_value())),
            "remez": fit.certificate(),
            "K": K,
        }
    return MeasurePair(mu, nu, s, None, float(s_gap), cert)
