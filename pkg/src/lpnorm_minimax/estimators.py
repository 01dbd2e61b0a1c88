"""Plug-in Lp-norm estimation with a fixed-bandwidth bump-kernel KDE, a
pairwise-kernel estimator of the squared L2 norm, and Monte Carlo risk."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import kernels
from .family import bump_power_integral


@dataclass(frozen=True)
class KdeSpec:
    """Product bump kernel with per-axis bandwidths on a regular grid."""

    bandwidths: tuple
    lo: tuple
    dx: tuple
    ngrid: tuple

    def __post_init__(self):
        for name in ("bandwidths", "lo", "dx", "ngrid"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        d = len(self.bandwidths)
        if d not in (1, 2) or not (len(self.lo) == len(self.dx) == len(self.ngrid) == d):
            raise ValueError("KDE grids are supported in one and two dimensions")
        if any(h <= 0 for h in self.bandwidths) or any(s <= 0 for s in self.dx):
            raise ValueError("bandwidths and grid steps must be positive")

    @property
    def d(self) -> int:
        return len(self.bandwidths)

    @property
    def hi(self) -> tuple:
        return tuple(l + (k - 1) * s for l, k, s in zip(self.lo, self.ngrid, self.dx))

    @property
    def cell(self) -> float:
        return math.prod(self.dx)

    def covers(self, x: np.ndarray) -> bool:
        x = x.reshape(-1, self.d)
        lo_ok = np.all(x.min(axis=0) - np.array(self.bandwidths) >= np.array(self.lo))
        hi_ok = np.all(x.max(axis=0) + np.array(self.bandwidths) <= np.array(self.hi))
        return bool(lo_ok and hi_ok)


def grid_for(x, bandwidths: Sequence[float], per_bandwidth: int = 16) -> KdeSpec:
    """Grid covering the data plus one bandwidth with ``dx = h / per_bandwidth``."""
    x = np.asarray(x, dtype=float)
    x = x.reshape(x.shape[0], -1)
    h = np.asarray(bandwidths, dtype=float)
    dx = h / per_bandwidth
    lo = x.min(axis=0) - h - dx
    hi = x.max(axis=0) + h + dx
    ngrid = np.ceil((hi - lo) / dx).astype(int) + 1
    return KdeSpec(tuple(h), tuple(lo), tuple(dx), tuple(int(k) for k in ngrid))


def kde_on_grid(x, spec: KdeSpec) -> np.ndarray:
    x = np.ascontiguousarray(np.asarray(x, dtype=float).reshape(-1, spec.d))
    if x.shape[0] == 0:
        raise ValueError("empty sample")
    if not spec.covers(x):
        raise ValueError("grid does not cover the data plus one bandwidth")
    if spec.d == 1:
        return kernels.kde_grid_1d(np.ascontiguousarray(x[:, 0]), spec.bandwidths[0],
                                   spec.lo[0], spec.dx[0], spec.ngrid[0])
    return kernels.kde_grid_2d(x, *spec.bandwidths, *spec.lo, *spec.dx, *spec.ngrid)


def lp_norm_grid(values: np.ndarray, cell: float, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(values)))
    return float((np.sum(np.abs(values) ** p) * cell) ** (1.0 / p))


def plugin_lp(x, spec: KdeSpec | None, p: float, bandwidths: Sequence[float] | None = None) -> float:
    """``||f_hat||_p`` for the KDE ``f_hat`` evaluated on the grid.

    Pass either a grid ``spec`` or ``bandwidths`` (a covering grid is built).
    """
    if not p >= 1:
        raise ValueError("p must be >= 1")
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample")
    if spec is None:
        if bandwidths is None:
            raise ValueError("need a grid spec or bandwidths")
        spec = grid_for(x, bandwidths)
    return lp_norm_grid(kde_on_grid(x, spec), spec.cell, p)


def kernel_lp_norm(p: float, d: int = 1) -> float:
    """``||K||_p`` for the product bump kernel."""
    if math.isinf(p):
        return (math.exp(-1.0) / kernels.BUMP_NORM) ** d
    return bump_power_integral(float(p)) ** (d / p)


def ustat_l2(x, bandwidths) -> float:
    """``(n(n-1))^{-1} sum_{i != j} K_h(X_i - X_j)`` with the product bump kernel."""
    x = np.asarray(x, dtype=float)
    x = x.reshape(x.shape[0], -1) if x.ndim > 1 else x[:, None]
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least two observations")
    h = np.broadcast_to(np.asarray(bandwidths, dtype=float), (x.shape[1],)).copy()
    xs = np.ascontiguousarray(x[np.argsort(x[:, 0], kind="stable")])
    s = kernels.pair_kernel_sum(xs, h)
    return 2.0 * s / (n * (n - 1) * float(np.prod(h)))


def oracle_bandwidth(n: int, beta: Sequence[float], scale: float | Sequence[float] = 1.0) -> tuple:
    """``h_l = scale_l * n^(-1 / (beta_l (2 + 1/beta)))`` with ``1/beta = sum 1/beta_l``."""
    beta = np.asarray(beta, dtype=float)
    inv_beta = float(np.sum(1.0 / beta))
    scale = np.broadcast_to(np.asarray(scale, dtype=float), beta.shape)
    return tuple(float(c) * n ** (-1.0 / (b * (2.0 + inv_beta))) for c, b in zip(scale, beta))


# ----------------------------------------------------------------------------
# test densities with closed-form norms


@dataclass(frozen=True)
class GaussianDensity:
    """Centred isotropic Gaussian with standard deviation ``sigma``."""

    d: int = 1
    sigma: float = 1.0

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.normal(0.0, self.sigma, size=(n, self.d))

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.prod(stats.norm.pdf(x, scale=self.sigma), axis=1)

    def lp_norm(self, p: float) -> float:
        if math.isinf(p):
            return (2 * math.pi * self.sigma ** 2) ** (-self.d / 2)
        one = (2 * math.pi * self.sigma ** 2) ** ((1 - p) / 2) * p ** -0.5
        return one ** (self.d / p)


@dataclass
class RiskReport:
    n_grid: list
    risks: list
    stderrs: list
    slope: float
    slope_stderr: float
    intercept: float
    predicted_exponent: float | None
    margin: float | None
    residuals: list
    reps: int
    seed: int
    truth: float
    bandwidths: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


def _risk_one_n(job) -> tuple:
    density, n, reps, seed, j, p, bandwidths, estimator = job
    errs = np.empty(reps)
    truth = density.lp_norm(p)
    for i in range(reps):
        rng = np.random.default_rng([seed, j, i])
        x = density.sample(n, rng)
        est = estimator(x, p, bandwidths) if estimator is not None else plugin_lp(
            x, None, p, bandwidths)
        errs[i] = est - truth
    return errs


def risk_mc(density, n_grid: Sequence[int], reps: int, p: float, beta: Sequence[float],
            seed: int = 0, bandwidth_scale: float = 1.0, predicted: float | None = None,
            estimator: Callable | None = None, threads: int = 1) -> RiskReport:
    """Root mean squared error of an Lp-norm estimator over ``n_grid``.

    ``estimator(x, p, bandwidths)`` defaults to :func:`plugin_lp`. The
    log-log slope is fitted by least squares with its standard error.
    """
    n_grid = [int(n) for n in n_grid]
    hs = [oracle_bandwidth(n, beta, bandwidth_scale) for n in n_grid]
    jobs = [(density, n, reps, seed, j, p, h, estimator) for j, (n, h) in enumerate(zip(n_grid, hs))]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            all_errs = list(ex.map(_risk_one_n, jobs))
    else:
        all_errs = [_risk_one_n(job) for job in jobs]
    risks, ses = [], []
    for errs in all_errs:
        sq = errs ** 2
        mse = float(np.mean(sq))
        rmse = math.sqrt(mse)
        se_mse = float(np.std(sq, ddof=1) / math.sqrt(len(sq))) if len(sq) > 1 else float("nan")
        risks.append(rmse)
        ses.append(se_mse / (2 * rmse) if rmse > 0 else 0.0)
    if all(r > 0 for r in risks) and len(n_grid) >= 2:
        fit = stats.linregress(np.log(n_grid), np.log(risks))
        slope, slope_se, icpt = float(fit.slope), float(fit.stderr), float(fit.intercept)
        resid = [float(v) for v in np.log(risks) - (icpt + slope * np.log(n_grid))]
    else:
        slope = slope_se = icpt = float("nan")
        resid = []
    margin = abs(slope + predicted) if predicted is not None else None
    return RiskReport(n_grid, risks, ses, slope, slope_se, icpt, predicted, margin, resid,
                      reps, seed, density.lp_norm(p), [list(h) for h in hs])
