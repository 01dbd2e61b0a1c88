"""Rate exponents and regime classification for Lp-norm estimation over
anisotropic Nikolskii classes.

All quantities are pure functions of a :class:`ClassParams` record. Infinite
integrability indices are represented by ``math.inf`` and ``1/inf`` is taken
to be zero.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

INF = math.inf
_BOUNDARY_TOL = 1e-12


class Regime(str, enum.Enum):
    INTEGER_CASE1 = "IntegerCase1"
    INTEGER_CASE2 = "IntegerCase2"
    INTEGER_CASE3 = "IntegerCase3"
    NONINT_CASE1 = "NonIntCase1"
    NONINT_CASE2 = "NonIntCase2"
    NONINT_CASE3 = "NonIntCase3"
    INCONSISTENT = "Inconsistent"
    PARAMETRIC = "Parametric"


class DZone(str, enum.Enum):
    D1 = "D1"
    D2 = "D2"
    NEITHER = "Neither"


def _recip(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def is_integer_index(p: float) -> bool:
    return float(p).is_integer()


@dataclass(frozen=True)
class ClassParams:
    """Smoothness and integrability parameters of the density class.

    Parameters
    ----------
    d : int
        Dimension.
    beta : sequence of float
        Directional smoothness indices, all positive.
    r : sequence of float
        Directional integrability indices in ``[1, inf]``.
    L : sequence of float
        Directional radii, all positive.
    p : float
        Norm index, ``p > 1``.
    q : float
        Bound index for ``||f||_q``; must satisfy ``q >= max(p, max(r))``.
    """

    d: int
    beta: tuple
    r: tuple
    L: tuple
    p: float
    q: float = INF

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        object.__setattr__(self, "r", tuple(float(v) for v in self.r))
        object.__setattr__(self, "L", tuple(float(v) for v in self.L))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        for name in ("beta", "r", "L"):
            if len(getattr(self, name)) != self.d:
                raise ValueError(f"{name} must have length d={self.d}")
        if any(not (b > 0) or math.isinf(b) for b in self.beta):
            raise ValueError("all beta_j must be finite and positive")
        if any(not (v > 0) or math.isinf(v) for v in self.L):
            raise ValueError("all L_j must be finite and positive")
        if any(not (v >= 1) for v in self.r):
            raise ValueError("all r_j must be >= 1")
        if not (self.p > 1) or math.isinf(self.p):
            raise ValueError("p must be a finite real > 1")
        if not (self.q >= 1):
            raise ValueError("q must be >= 1")
        if self.q < max(self.p, self.r_star):
            raise ValueError(
                f"q={self.q} must be >= max(p, max r_j) = {max(self.p, self.r_star)}")

    @property
    def r_star(self) -> float:
        return max(self.r)

    @property
    def inv_beta(self) -> float:
        return math.fsum(1.0 / b for b in self.beta)

    @property
    def inv_omega(self) -> float:
        return math.fsum(_recip(b * rj) for b, rj in zip(self.beta, self.r))

    @property
    def bbL(self) -> float:
        return math.exp(math.fsum(math.log(Lj) / b for Lj, b in zip(self.L, self.beta)))

    @property
    def p_is_integer(self) -> bool:
        return is_integer_index(self.p)


@dataclass(frozen=True)
class DerivedScales:
    inv_beta: float
    inv_omega: float
    bbL: float

    def tau(self, s: float) -> float:
        return 1.0 - self.inv_omega + self.inv_beta * _recip(s)


def derived(params: ClassParams) -> DerivedScales:
    return DerivedScales(params.inv_beta, params.inv_omega, params.bbL)


@dataclass(frozen=True)
class RateResult:
    """Exponents of ``bbL**constant_exponent * n**-exponent * (ln n)**log_exponent``."""

    exponent: float
    log_exponent: float
    constant_exponent: float
    regime: Regime
    raw: float = math.nan  # theta or vartheta before any cap
    notes: tuple = field(default=())


def tau(params: ClassParams, s: float) -> float:
    """Embedding index ``1 - 1/omega + 1/(beta s)``; ``s = inf`` gives ``1 - 1/omega``."""
    s = float(s)
    if math.isnan(s) or s < 1:
        raise ValueError(f"tau requires s >= 1, got {s}")
    return derived(params).tau(s)


def _same(a: float, b: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= _BOUNDARY_TOL * max(1.0, abs(a), abs(b))


def rate_integer(params: ClassParams) -> RateResult:
    p, q = params.p, params.q
    if not params.p_is_integer or p < 2:
        raise ValueError(f"rate_integer needs an integer p >= 2, got {p}")
    t1, tp, tq = tau(params, 1), tau(params, p), tau(params, q)
    const = (1 - 1 / p) / t1
    if tp >= 1:
        theta, regime = 1 / t1, Regime.INTEGER_CASE1
    elif tq < 0:
        theta = (1 / p - _recip(q)) / (1 - _recip(q) - (1 - 1 / p) * tq)
        regime = Regime.INTEGER_CASE2
    else:
        theta, regime = tp / t1, Regime.INTEGER_CASE3
    theta_star = min(0.5, theta)
    notes = ()
    if _same(q, p) and params.r_star <= p and tp <= _BOUNDARY_TOL:
        regime = Regime.INCONSISTENT
        notes = ("no uniformly consistent estimator in this zone",)
    elif theta >= 0.5:
        regime = Regime.PARAMETRIC
    return RateResult(theta_star, 0.0, const, regime, raw=theta, notes=notes)


def vartheta_star(params: ClassParams) -> float:
    """Log-factor index of the non-integer rate (the companion of vartheta)."""
    p = params.p
    t1, tp, tq = tau(params, 1), tau(params, p), tau(params, params.q)
    if tp >= 1 - 1 / p:
        return (2 * (1 - 1 / p) - tp) / t1
    if tq < 0:
        return _noninteger_case2(params)
    return 2 * p


def _noninteger_case2(params: ClassParams) -> float:
    p, q = params.p, params.q
    tq = tau(params, q)
    return (1 / p - _recip(q)) / (1 - _recip(q) - tq)


def rate_noninteger(params: ClassParams) -> RateResult:
    p, q = params.p, params.q
    if params.p_is_integer:
        raise ValueError(f"rate_noninteger needs a non-integer p, got {p}")
    t1, tp, tq = tau(params, 1), tau(params, p), tau(params, q)
    const = (1 - 1 / p) / t1
    if tp >= 1 - 1 / p:
        vt, regime = min(0.5, (1 - 1 / p) / t1), Regime.NONINT_CASE1
    elif tq < 0:
        vt, regime = _noninteger_case2(params), Regime.NONINT_CASE2
    else:
        vt, regime = min(0.5, tp / t1), Regime.NONINT_CASE3
    vts = vartheta_star(params)
    notes = ()
    if _same(q, p) and abs(tp) <= _BOUNDARY_TOL:
        regime = Regime.INCONSISTENT
        notes = ("no uniformly consistent estimator in this zone",)
    return RateResult(vt, vts - 2 * p, const, regime, raw=vt, notes=notes)


def rate_lp_loss(params: ClassParams) -> float:
    """Exponent ``tau(p)/tau(1)`` of the density-estimation lower bound in Lp loss."""
    p = params.p
    tp = tau(params, p)
    upper = 1.0 if params.p_is_integer else 1 - 1 / p
    if params.r_star > p or not _same(params.q, p):
        raise ValueError("rate_lp_loss requires max r_j <= p and q == p")
    if not (0 < tp < upper):
        raise ValueError(f"rate_lp_loss requires 0 < tau(p) < {upper}, got tau(p)={tp}")
    return tp / tau(params, 1)


@dataclass(frozen=True)
class DClassification:
    zone: DZone
    gamma1: float | None = None
    gamma2: float | None = None


def classify_D_sets(params: ClassParams) -> DClassification:
    p = params.p
    if params.p_is_integer:
        raise ValueError("classify_D_sets needs a non-integer p")
    if not math.isinf(params.q):
        raise ValueError("classify_D_sets needs q = inf")
    t1, tp, tinf = tau(params, 1), tau(params, p), tau(params, INF)
    if tp > 2 * (1 - 1 / p):
        return DClassification(DZone.D1, (2 * (1 - 1 / p) - tp) / t1,
                               params.d - 1 + (1 - 1 / p) / t1)
    if tp < 1 - 2 / p and tinf < 0:
        omega_over_p = 1 / (params.inv_omega * p)
        return DClassification(DZone.D2, omega_over_p, omega_over_p)
    return DClassification(DZone.NEITHER)


class FunctionalKind(str, enum.Enum):
    ENTROPY = "Entropy"
    TSALLIS = "Tsallis"


def rate_functional(kind: str | FunctionalKind, p: float | None = None) -> RateResult:
    """Logarithmic rates for the entropy and the Tsallis entropy with index in (0, 1)."""
    kind = FunctionalKind(kind)
    if kind is FunctionalKind.ENTROPY:
        return RateResult(0.0, -3.0, 0.0, Regime.NONINT_CASE1, notes=("entropy",))
    if p is None or not (0 < p < 1):
        raise ValueError(f"Tsallis index must lie in (0, 1), got {p}")
    return RateResult(0.0, -2.0 * p, 0.0, Regime.NONINT_CASE1, notes=("tsallis",))


def rates_summary(params: ClassParams) -> dict:
    """Flat record with every exponent that applies to ``params``."""
    out = {"theta": None, "theta_star": None, "vartheta": None, "vartheta_star": None,
           "regime": None, "gamma1": None, "gamma2": None, "zone": None}
    if params.p_is_integer:
        res = rate_integer(params)
        out.update(theta=res.raw, theta_star=res.exponent)
    else:
        res = rate_noninteger(params)
        out.update(vartheta=res.exponent, vartheta_star=vartheta_star(params))
        if math.isinf(params.q):
            cls = classify_D_sets(params)
            out.update(zone=cls.zone.value, gamma1=cls.gamma1, gamma2=cls.gamma2)
    out["regime"] = res.regime.value
    out["constant_exponent"] = res.constant_exponent
    out["log_exponent"] = res.log_exponent
    out["tau_at"] = {"1": tau(params, 1), "p": tau(params, params.p),
                     "q": tau(params, params.q), "inf": tau(params, INF)}
    return out


def make_params(d: int, beta: Sequence[float], r: Sequence[float], p: float,
                q: float = INF, L: Sequence[float] | None = None) -> ClassParams:
    return ClassParams(d, tuple(beta), tuple(r), tuple(L or [1.0] * d), p, q)
