"""Bump-density family built on a smoothed-box base density, its functionals
and the generic parameter selection.

Geometry: the base density lives on the negative orthant and the ``M`` bumps
sit at ``2 * (k + 1)`` for multi-indices ``k`` enumerated in row-major order,
so bump boxes of half-width at most one never touch each other or the base.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate

from .kernels import BUMP_NORM
from .measures.measure import moment
from .measures.priors import MeasurePair
from .rates import ClassParams, INF, tau

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_T_FLOOR = -3.6  # exp(-cosh(3.6)^2) is below 1e-140


def bump1d(u):
    """Normalised one-dimensional bump ``exp(-1/(1-u^2))/C`` on (-1, 1)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2)) / BUMP_NORM
    return out


def _half_cdf(u):
    # integral over (-1, u] for u <= 0 after the substitution u = tanh(t)
    with np.errstate(divide="ignore"):
        t_hi = np.maximum(np.arctanh(np.clip(u, -1.0, 0.0)), _T_FLOOR)
    half = 0.5 * (t_hi - _T_FLOOR)
    mid = 0.5 * (t_hi + _T_FLOOR)
    t = mid[..., None] + half[..., None] * _GL_NODES
    vals = np.exp(-np.cosh(t) ** 2) / np.cosh(t) ** 2
    return half * (vals @ _GL_WEIGHTS) / BUMP_NORM


def bump_cdf(u):
    """Distribution function of :func:`bump1d`."""
    u = np.asarray(u, dtype=float)
    neg = np.where(u <= 0, u, -u)
    low = _half_cdf(np.clip(neg, -1.0, 0.0))
    out = np.where(u <= 0, low, 1.0 - low)
    out = np.where(u <= -1, 0.0, out)
    return np.where(u >= 1, 1.0, out)


def _bump_power_integral(z: float) -> float:
    """``int bump1d(u)**z du`` computed in the ``u = tanh(t)`` variable."""
    if math.isinf(z):
        raise ValueError("use the sup norm for z = inf")
    t_max = math.acosh(math.sqrt(750.0 / z + 1.0))

    def f(t):
        c2 = math.cosh(t) ** 2
        return math.exp(-z * c2) / c2 * BUMP_NORM ** (-z)

    val, _ = integrate.quad(f, -t_max, t_max, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


def _bump_entropy_integral() -> float:
    """``int bump1d ln bump1d``."""
    def f(t):
        c2 = math.cosh(t) ** 2
        b = math.exp(-c2) / BUMP_NORM
        return b * (-c2 - math.log(BUMP_NORM)) / c2
    val, _ = integrate.quad(f, -4.0, 4.0, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


@lru_cache(maxsize=None)
def bump_power_integral(z: float) -> float:
    return _bump_power_integral(float(z))


@lru_cache(maxsize=None)
def cdf_power_integral(z: float) -> float:
    """``int_{-1}^{1} B(u)**z du`` for the bump distribution function ``B``."""
    val, _ = integrate.quad(lambda u: float(bump_cdf(np.array([u]))[0]) ** z, -1, 1,
                            epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


@dataclass(frozen=True)
class BumpProfile:
    """Product bump ``Lambda(x) = prod_j bump1d(x_j)`` on ``[-1, 1]^d``."""

    d: int

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.prod(bump1d(x), axis=1)

    def norm_power(self, z: float) -> float:
        """``||Lambda||_z ** z`` (the sup norm itself for ``z = inf``)."""
        if math.isinf(z):
            return (math.exp(-1.0) / BUMP_NORM) ** self.d
        return bump_power_integral(float(z)) ** self.d

    def norm(self, z: float) -> float:
        if math.isinf(z):
            return self.norm_power(z)
        return self.norm_power(z) ** (1.0 / z)

    def entropy_integral(self) -> float:
        """``int Lambda ln Lambda``."""
        return self.d * _bump_entropy_integral()

    def sample(self, count: int, rng: np.random.Generator, max_rounds: int = 1000) -> np.ndarray:
        out = np.empty(count * self.d)
        filled = 0
        peak = math.exp(-1.0)
        for _ in range(max_rounds):
            if filled == out.size:
                break
            want = int(1.8 * (out.size - filled)) + 16
            u = rng.uniform(-1.0, 1.0, want)
            acc = u[rng.uniform(0.0, peak, want) < np.exp(-1.0 / (1.0 - u * u))]
            take = min(acc.size, out.size - filled)
            out[filled:filled + take] = acc[:take]
            filled += take
        else:
            raise RuntimeError("bump rejection sampler exceeded its round cap")
        return out.reshape(count, self.d)


@dataclass(frozen=True)
class BaseDensity:
    """``f0(x) = prod_j (a/N) [B(-1 - a x_j) - B(-N - 1 - a x_j)]``.

    This is the box indicator of ``[-N-1, -1]^d`` divided by ``N^d`` and
    convolved with the bump, then rescaled by ``a``. Its support is
    ``[-(N+2)/a, 0]^d``.
    """

    d: int
    N: float
    a: float = 1.0

    def __post_init__(self):
        if not self.N > 0 or not self.a > 0:
            raise ValueError("N and a must be positive")

    def marginal(self, y):
        y = np.asarray(y, dtype=float) * self.a
        return self.a / self.N * (bump_cdf(-1.0 - y) - bump_cdf(-self.N - 1.0 - y))

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.prod(self.marginal(x), axis=1)

    def marginal_power_integral(self, z: float) -> float:
        """``int g(y)**z dy`` for the one-dimensional factor ``g``."""
        if math.isinf(z):
            return self.a / self.N if self.N >= 2 else float(np.max(self.marginal(
                np.linspace(-(self.N + 2) / self.a, 0, 20001))))
        if self.N >= 2:
            core = (self.N - 2.0) + 2.0 * cdf_power_integral(float(z))
        else:
            f = lambda y: (float(bump_cdf(np.array([-1.0 - y]))[0])
                           - float(bump_cdf(np.array([-self.N - 1.0 - y]))[0])) ** z
            core, _ = integrate.quad(f, -self.N - 2.0, 0.0, points=[-self.N, -2.0],
                                     epsabs=1e-14, limit=200)
        return self.N ** (-z) * self.a ** (z - 1.0) * core

    def norm_power(self, z: float) -> float:
        """``||f0||_z ** z`` (sup norm for ``z = inf``)."""
        return self.marginal_power_integral(z) ** self.d

    def norm(self, z: float) -> float:
        if math.isinf(z):
            return self.norm_power(z)
        return self.norm_power(z) ** (1.0 / z)

    def entropy_integral(self) -> float:
        """``int f0 ln f0`` (finite: compact support, bounded density)."""
        def f(y):
            g = float(self.marginal(np.array([y]))[0])
            return g * math.log(g) if g > 0 else 0.0
        lo = -(self.N + 2.0) / self.a
        pts = sorted({-self.N / self.a, -2.0 / self.a})
        pts = [p for p in pts if lo < p < 0]
        val, err = integrate.quad(f, lo, 0.0, points=pts or None, epsabs=1e-13, limit=400)
        if not math.isfinite(val):
            raise ValueError("entropy integral of the base density diverged on "
                             f"[{lo}, 0]")
        return self.d * val

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        box = rng.uniform(-self.N - 1.0, -1.0, size=(count, self.d))
        return (box + BumpProfile(self.d).sample(count, rng)) / self.a


def build_base(q: float, Q: float, params: ClassParams, a: float = 1.0,
               N_min: float = 2.0) -> BaseDensity:
    """Smallest ``N >= N_min`` with ``||f0||_q <= Q/2``.

    Requires ``q > max_j r_j`` and ``Q > 0``.
    """
    if not Q > 0:
        raise ValueError("Q must be positive")
    if not q > params.r_star:
        raise ValueError(f"q={q} must exceed max r_j={params.r_star}")
    N = _calibrate_N(lambda base: base.norm(q), Q / 2.0, params.d, a, N_min)
    return BaseDensity(params.d, N, a)


def _calibrate_N(value, target: float, d: int, a: float, N_min: float) -> float:
    """Smallest ``N >= N_min`` with ``value(BaseDensity(d, N, a)) <= target``,
    by bisection in ``log N`` (the value decreases in ``N``)."""
    if value(BaseDensity(d, N_min, a)) <= target:
        return N_min
    lo, hi = math.log(N_min), math.log(N_min) + 1.0
    while value(BaseDensity(d, math.exp(hi), a)) > target:
        lo, hi = hi, 2 * hi + 1.0
        if hi > 700:
            raise ValueError("no N below 1e300 meets the base-density norm target")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if value(BaseDensity(d, math.exp(mid), a)) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    return math.exp(hi)


def grid_side(M: int, d: int) -> int:
    g = max(1, int(round(M ** (1.0 / d))))
    while g ** d < M:
        g += 1
    while g > 1 and (g - 1) ** d >= M:
        g -= 1
    return g


@dataclass(frozen=True)
class DensityFamily:
    """The family ``f_w`` indexed by bump weights ``w`` in ``[0, 1]^M``."""

    profile: BumpProfile
    base: BaseDensity
    sigma: tuple
    A: float
    M: int
    m_vol: float = field(init=False)

    def __post_init__(self):
        sig = tuple(float(s) for s in self.sigma)
        object.__setattr__(self, "sigma", sig)
        if len(sig) != self.profile.d or any(not (0 < s <= 1) for s in sig):
            raise ValueError("sigma must have d entries in (0, 1]")
        if self.M < 1 or self.A <= 0:
            raise ValueError("M must be >= 1 and A > 0")
        object.__setattr__(self, "m_vol", math.prod(sig))

    @property
    def d(self) -> int:
        return self.profile.d

    @property
    def side(self) -> int:
        return grid_side(self.M, self.d)

    def centers(self, idx=None) -> np.ndarray:
        """Centres ``2 * (multi_index + 1)`` in row-major order."""
        idx = np.arange(self.M) if idx is None else np.asarray(idx)
        g = self.side
        multi = np.stack(np.unravel_index(idx, (g,) * self.d), axis=-1)
        return 2.0 * (multi + 1)

    def D(self, e1: float) -> float:
        """``A m / (1 - A m M e1)``."""
        am = self.A * self.m_vol
        return am / (1.0 - am * self.M * e1)

    def with_M(self, M: int) -> "DensityFamily":
        return replace(self, M=int(M))

    def locate(self, x) -> np.ndarray:
        """Bump index of each point, or -1 for points outside every box."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[0] == 0:
            return np.empty(0, dtype=np.int64)
        k = np.rint(x / 2.0).astype(np.int64) - 1
        g = self.side
        sig = np.asarray(self.sigma)
        inside = np.all((k >= 0) & (k < g), axis=1)
        inside &= np.all(np.abs(x - 2.0 * (k + 1)) <= sig, axis=1)
        lin = np.full(x.shape[0], -1, dtype=np.int64)
        if inside.any():
            lin_in = np.ravel_multi_index(tuple(k[inside].T), (g,) * self.d)
            lin_in = np.where(lin_in < self.M, lin_in, -1)
            lin[inside] = lin_in
        return lin


def _check_weights(fam: DensityFamily, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (fam.M,):
        raise ValueError(f"w must have shape ({fam.M},)")
    if np.any(w < 0) or np.any(w > 1):
        raise ValueError("w must lie in [0, 1]^M")
    return w


def eval_density(fam: DensityFamily, w, x) -> np.ndarray:
    """``[1 - A m sum(w)] f0(x) + A sum_m w_m Lambda((x - x_m)/sigma)``."""
    w = _check_weights(fam, w)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    rho1 = math.fsum(w)
    out = (1.0 - fam.A * fam.m_vol * rho1) * fam.base(x)
    m = fam.locate(x)
    hit = m >= 0
    if hit.any():
        u = (x[hit] - fam.centers(m[hit])) / np.asarray(fam.sigma)
        out[hit] += fam.A * w[m[hit]] * fam.profile(u)
    return out


def sample(fam: DensityFamily, w, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` i.i.d. draws from ``f_w``."""
    w = _check_weights(fam, w)
    if count == 0:
        return np.empty((0, fam.d))
    rho1 = math.fsum(w)
    p_bump = fam.A * fam.m_vol * rho1
    if p_bump > 1:
        raise ValueError("A m sum(w) exceeds one; f_w is not a density")
    n_bump = int(rng.binomial(count, p_bump)) if p_bump > 0 else 0
    parts = [fam.base.sample(count - n_bump, rng)]
    if n_bump:
        which = rng.choice(fam.M, size=n_bump, p=w / rho1)
        shape = fam.profile.sample(n_bump, rng)
        parts.append(fam.centers(which) + np.asarray(fam.sigma) * shape)
    pts = np.concatenate(parts, axis=0)
    return pts[rng.permutation(count)]


# ----------------------------------------------------------------------------
# Functionals G(int H(f))


@dataclass(frozen=True)
class Functional:
    """``Psi(f) = G(int H(f))`` for one of the supported kinds."""

    kind: str
    p: float | None = None

    KINDS = ("LpNorm", "IntegralPower", "Entropy", "Tsallis", "Renyi")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown functional kind {self.kind!r}")
        if self.kind != "Entropy":
            if self.p is None or not self.p > 0:
                raise ValueError(f"{self.kind} needs p > 0")
            if self.kind == "LpNorm" and not self.p >= 1:
                raise ValueError("LpNorm needs p >= 1")
            if self.kind in ("Tsallis", "Renyi") and self.p == 1:
                raise ValueError(f"{self.kind} needs p != 1")

    @property
    def is_power(self) -> bool:
        return self.kind in ("LpNorm", "IntegralPower", "Renyi")

    def H(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "Entropy":
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(y > 0, -y * np.log(np.where(y > 0, y, 1.0)), 0.0)
        if self.kind == "Tsallis":
            return y - np.abs(y) ** self.p
        return np.abs(y) ** self.p

    def G(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "LpNorm":
            return np.maximum(y, 0.0) ** (1.0 / self.p)
        if self.kind == "Tsallis":
            return y / (self.p - 1.0)
        if self.kind == "Renyi":
            with np.errstate(divide="ignore"):
                return np.log(np.maximum(y, 0.0)) / (1.0 - self.p)
        return y

    def G_monotone_increasing(self) -> bool:
        if self.kind in ("Tsallis", "Renyi"):
            return self.p > 1 if self.kind == "Tsallis" else self.p < 1
        return True

    def S(self, z, profile: BumpProfile):
        """``int H(z Lambda)``."""
        z = np.asarray(z, dtype=float)
        if self.kind == "Entropy":
            with np.errstate(divide="ignore", invalid="ignore"):
                zl = np.where(z > 0, z * np.log(np.where(z > 0, z, 1.0)), 0.0)
            return -zl - z * profile.entropy_integral()
        npp = profile.norm_power(self.p)
        if self.kind == "Tsallis":
            return z - z ** self.p * npp
        return z ** self.p * npp

    def S0(self, z, base: BaseDensity):
        """``int H((1 - z) f0)``."""
        z = np.asarray(z, dtype=float)
        y = 1.0 - z
        if self.kind == "Entropy":
            with np.errstate(divide="ignore", invalid="ignore"):
                yl = np.where(y > 0, y * np.log(np.where(y > 0, y, 1.0)), 0.0)
            return -yl - y * base.entropy_integral()
        npp = base.norm_power(self.p)
        if self.kind == "Tsallis":
            return y - np.abs(y) ** self.p * npp
        return np.abs(y) ** self.p * npp


def integral_H(fam: DensityFamily, w, F: Functional) -> float:
    """``int H(f_w)`` through the base/bump decomposition."""
    w = _check_weights(fam, w)
    am = fam.A * fam.m_vol
    bumps = F.S(fam.A * w, fam.profile)
    return float(F.S0(am * math.fsum(w), fam.base)) + fam.m_vol * math.fsum(bumps)


def functional_value(fam: DensityFamily, w, F: Functional) -> float:
    return float(F.G(integral_H(fam, w, F)))


# ----------------------------------------------------------------------------
# Parameter selection


@dataclass(frozen=True)
class Constants:
    """Tuning constants; ``None`` means calibrated automatically."""

    kappa0: float = 0.1
    kappa1: float = 0.01
    c1: float = 1.0
    c2: float = 1.0
    c3: float | None = None
    c4: float | None = None
    c5: float | None = None
    c_base: float = 1.0
    upsilon: float | None = None
    Q: float = 1.0
    a: float = 1.0

    def upsilon_for(self, d: int) -> float:
        return 64.0 * (d + 1) if self.upsilon is None else float(self.upsilon)


@dataclass(frozen=True)
class SelectionInputs:
    params: ClassParams
    n: int
    r: int
    pair: MeasurePair
    constants: Constants = Constants()


@dataclass
class SelectionResult:
    feasible: bool
    v: float
    t: float
    d_lower: float
    n_upper: float
    J: tuple | None
    M: int | None
    A: float | None = None
    sigma: tuple | None = None
    m_vol: float | None = None
    objective: float | None = None
    objective_exponent: float | None = None
    c3: float | None = None
    c4: float | None = None
    c5: float | None = None
    e_q: float | None = None
    family: DensityFamily | None = None
    identities: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    intervals: dict = field(default_factory=dict)
    violated: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "feasible": self.feasible, "v": self.v, "t": self.t, "d_lower": self.d_lower,
            "n_upper": self.n_upper, "J": list(self.J) if self.J else None, "M": self.M,
            "A": self.A, "sigma": list(self.sigma) if self.sigma else None,
            "m_vol": self.m_vol, "objective": self.objective,
            "objective_exponent": self.objective_exponent,
            "c3": self.c3, "c4": self.c4, "c5": self.c5,
            "N": self.family.base.N if self.family else None,
            "identities": self.identities, "checks": self.checks,
            "intervals": {k: list(v) for k, v in self.intervals.items()},
            "violated": self.violated,
        }


def _power_interval(coef: float, expo: float) -> tuple[float, float]:
    """Set of ``x > 0`` with ``coef * x**expo <= 1``."""
    if coef <= 0:
        return (0.0, INF)
    if expo == 0:
        return (0.0, INF) if coef <= 1 else (INF, 0.0)
    bound = coef ** (-1.0 / expo)
    return (0.0, bound) if expo > 0 else (bound, INF)


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def e_scale(pair: MeasurePair, z: float) -> float:
    """``[e*(z)]^(1/z)`` with value one at ``z = inf``."""
    if math.isinf(z):
        return 1.0
    return pair.e_star(z) ** (1.0 / z)


def selection_exponents(params: ClassParams, t: float) -> dict:
    t1 = tau(params, 1)
    ib, io = params.inv_beta, params.inv_omega
    it = _inv(t)
    return {
        "A_M": -(it + (1 - it) * io) / t1,
        "A_ev": (1 - io) / t1,
        "m_M": (io - ib * it) / t1,
        "m_ev": ib / t1,
        "objective": (1 / params.p - it + (1 - it) * (ib / params.p - io)) / t1,
    }


def _sigma_A_m(params: ClassParams, M: float, v: float, eq: float, c3: float, c4: float,
               t: float) -> tuple:
    t1 = tau(params, 1)
    it = _inv(t)
    bbL = params.bbL
    ev = eq * v
    sig = []
    for b, r, L in zip(params.beta, params.r, params.L):
        ir = _inv(r)
        tr = tau(params, r)
        s = (c3 ** (1 / b) * L ** (-1 / b) * bbL ** ((1 / b - ir / b) / t1)
             * ev ** (tr / (b * t1)) * M ** ((ir - 1 + (1 - it) * tr) / (b * t1)))
        sig.append(s)
    ex = selection_exponents(params, t)
    A = c4 / eq * bbL ** (1 / t1) * ev ** ex["A_ev"] * M ** ex["A_M"]
    m_formula = c3 ** params.inv_beta * bbL ** (-1 / t1) * ev ** ex["m_ev"] * M ** ex["m_M"]
    return tuple(sig), A, math.prod(sig), m_formula


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def select_parameters(si: SelectionInputs) -> SelectionResult:
    """Choose ``M, A, sigma`` for given class, sample size and prior pair.

    The admissible set of ``M`` is an intersection of intervals; the number
    of bumps maximises the power ``M**objective_exponent`` over it (hence sits
    at an endpoint). Constants ``c3`` and ``c4`` default to the largest
    values (capped at one) for which every membership and likelihood
    condition holds at the chosen ``M``.
    """
    params, n, r, pair, k = si.params, si.n, si.r, si.pair, si.constants
    p, q, d = params.p, params.q, params.d
    upsilon = k.upsilon_for(d)
    integer = params.p_is_integer
    v = 1.0 / n if integer else r / n
    t = p if integer else INF
    it = _inv(t)
    e_mu_p, e_nu_p = moment(pair.mu, p), moment(pair.nu, p)
    gap = abs(e_mu_p - e_nu_p)
    if gap <= 0:
        raise ValueError("the pair must separate the p-th moments")
    estar_p = max(e_mu_p, e_nu_p)
    d_lower = 64.0 * upsilon * estar_p ** 2 / gap ** 2
    n_upper = n ** (p / (p - 1)) if integer else min(math.exp(r), n / r)
    eq = e_scale(pair, q)
    tq = tau(params, q)
    intervals = {
        "moment_gap": (d_lower, INF),
        "sample_size": (1.0, n_upper),
        "variance": _power_interval(v * v * n, 1 - 2 * it),
        "norm_bound": _power_interval((eq * v) ** tq, _inv(q) - 1 + (1 - it) * tq),
    }
    lo = max(iv[0] for iv in intervals.values())
    hi = min(iv[1] for iv in intervals.values())
    M_lo, M_hi = math.ceil(lo - 1e-9 * lo), math.floor(hi + 1e-9 * hi) if math.isfinite(hi) else None
    res = SelectionResult(False, v, t, d_lower, n_upper, None, None, intervals=intervals)
    if M_hi is None or M_lo > M_hi:
        binding_lo = max(intervals, key=lambda name: intervals[name][0])
        binding_hi = min(intervals, key=lambda name: intervals[name][1])
        res.violated = [f"lower end {lo:.6g} from '{binding_lo}' exceeds upper end "
                        f"{hi:.6g} from '{binding_hi}' (no integer M available)"]
        return res
    ex = selection_exponents(params, t)
    kexp = ex["objective"]
    M = M_hi if kexp > 0 else M_lo
    res.J, res.M, res.objective_exponent = (lo, hi), M, kexp
    res.objective = M ** kexp
    res.e_q = eq

    c3 = k.c3
    if c3 is None:
        t1 = tau(params, 1)
        c3 = min([1.0] + [L * params.bbL ** (-(1 - _inv(rr)) / t1)
                          for L, rr in zip(params.L, params.r)])
    sigma, A1, m_prod, m_formula = _sigma_A_m(params, M, v, eq, c3, 1.0, t)
    profile = BumpProfile(d)
    # every condition is linear in c4 at fixed M, sigma, m
    am1 = A1 * m_prod
    limits = {
        "variance": k.kappa0 * n ** -0.5 / (am1 * math.sqrt(M)),
        "positivity": 0.5 / (am1 * M),
        "norm_bound": k.Q / 4 / (A1 * profile.norm(q) * (m_prod * M * pair.e_star(q)) ** _inv(q))
        if math.isfinite(q) else k.Q / 4 / (A1 * profile.norm(q)),
    }
    if integer:
        limits["likelihood"] = k.kappa1 / (n * am1 * M ** it)
    else:
        limits["likelihood"] = k.kappa1 * r / (n * am1)
    for l, (b, rr, L) in enumerate(zip(params.beta, params.r, params.L)):
        lhs = A1 * sigma[l] ** (-b) * profile.norm(rr) * (
            (m_prod * M * pair.e_star(rr)) ** _inv(rr) if math.isfinite(rr) else 1.0)
        limits[f"smoothness_{l}"] = k.c1 * L / lhs
    c4 = k.c4 if k.c4 is not None else min([1.0] + list(limits.values()))
    sigma, A, m_prod, m_formula = _sigma_A_m(params, M, v, eq, c3, c4, t)
    c5 = k.c5 if k.c5 is not None else c4 * c3 ** (params.inv_beta / p)
    res.A, res.sigma, res.m_vol, res.c3, res.c4, res.c5 = A, sigma, m_prod, c3, c4, c5
    res.identities = selection_identities(params, n, M, v, t, eq, c3, c4, c5, A, m_prod, m_formula)

    # base density: ||f0||_q <= Q/2 and ||f0||_p^p below the calibration level
    target_p = k.c_base * A ** p * m_prod * profile.norm_power(p) * pair.e_low(p) * math.sqrt(upsilon * M)
    N_q = _calibrate_N(lambda b: b.norm(q), k.Q / 2.0, d, k.a, 2.0)
    N_p = _calibrate_N(lambda b: b.norm_power(p), target_p, d, k.a, 2.0)
    base = BaseDensity(d, max(N_q, N_p), k.a)
    if all(0 < s <= 1 for s in sigma):
        res.family = DensityFamily(profile, base, sigma, A, M)
    res.checks = check_assumptions_raw(params, pair, n, r, k, A, sigma, m_prod, M)
    res.checks["sigma_le_one"] = {"lhs": max(sigma), "rhs": 1.0, "ok": max(sigma) <= 1.0}
    res.checks["base_q_norm"] = {"lhs": base.norm(q), "rhs": k.Q / 2, "ok": base.norm(q) <= k.Q / 2 * (1 + 1e-9)}
    res.checks["base_p_calibration"] = {"lhs": base.norm_power(p), "rhs": target_p,
                                        "ok": base.norm_power(p) <= target_p * (1 + 1e-9)}
    res.feasible = res.family is not None and all(c["ok"] for c in res.checks.values())
    res.violated = [name for name, c in res.checks.items() if not c["ok"]]
    return res


def selection_identities(params, n, M, v, t, eq, c3, c4, c5, A, m, m_formula) -> dict:
    """Relative residuals of the closed-form products of the selected parameters."""
    p, q = params.p, params.q
    t1 = tau(params, 1)
    it, iq = _inv(t), _inv(q)
    ib, bbL = params.inv_beta, params.bbL
    ev = eq * v
    tq, tp = tau(params, q), tau(params, p)
    kexp = (1 / p - it + (1 - it) * (ib / p - params.inv_omega)) / t1
    pairs = {
        "Am": (A * m, c4 * c3 ** ib * v * M ** (-it)),
        "AmM": (A * m * M, c4 * c3 ** ib * v * M ** (1 - it)),
        "nA2m2M": (n * A ** 2 * m ** 2 * M, c4 ** 2 * c3 ** (2 * ib) * M ** (1 - 2 * it) * v ** 2 * n),
        "q_norm": (A * eq * (m * M) ** iq,
                   c4 * c3 ** (ib * iq) * bbL ** ((1 - iq) / t1) * ev ** (tq / t1)
                   * M ** ((iq - 1 + (1 - it) * tq) / t1)),
        "p_norm": (A * (m * M) ** (1 / p),
                   c5 / eq * bbL ** ((1 - 1 / p) / t1) * ev ** (tp / t1) * M ** kexp),
        "m_product": (m, m_formula),
    }
    return {name: {"lhs": a, "rhs": b, "rel_error": _rel(a, b)} for name, (a, b) in pairs.items()}


def check_assumptions_raw(params: ClassParams, pair: MeasurePair, n: int, r: int,
                          k: Constants, A: float, sigma: Sequence[float], m: float,
                          M: int) -> dict:
    d, q = params.d, params.q
    upsilon = k.upsilon_for(d)
    profile = BumpProfile(d)
    out = {}

    def add(name, lhs, rhs):
        out[name] = {"lhs": lhs, "rhs": rhs, "margin": rhs - lhs,
                     "ok": bool(lhs <= rhs * (1 + 1e-12))}

    add("variance", A * m * math.sqrt(M), k.kappa0 * n ** -0.5)
    add("bump_count", 36 * upsilon, M)
    add("positivity", A * m * M, 0.5)
    qn = profile.norm(q) * ((m * M * pair.e_star(q)) ** _inv(q) if math.isfinite(q) else 1.0)
    add("norm_bound", A * qn, k.Q / 4)
    for l, (b, rr, L) in enumerate(zip(params.beta, params.r, params.L)):
        rn = profile.norm(rr) * ((m * M * pair.e_star(rr)) ** _inv(rr) if math.isfinite(rr) else 1.0)
        add(f"smoothness_{l}", A * sigma[l] ** (-b) * rn, k.c1 * L)
    if params.p_is_integer:
        add("likelihood", n * A * m * M ** (1 / params.p), k.kappa1)
    else:
        add("likelihood", n * A * m, k.kappa1 * r)
        add("bump_budget", M, math.exp(r))
    return out


def check_assumptions(fam: DensityFamily, pair: MeasurePair, n: int, r: int,
                      params: ClassParams, constants: Constants = Constants()) -> dict:
    """Report every sufficient condition with its two sides and margin."""
    return check_assumptions_raw(params, pair, n, r, constants, fam.A, fam.sigma,
                                 fam.m_vol, fam.M)
