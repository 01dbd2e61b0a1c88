"""Best uniform polynomial approximation on [0, 1] by Remez exchange.

Polynomials are carried in the Chebyshev basis ``T_j(2x - 1)``, which keeps
the linear systems well conditioned up to the degrees used here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import minimize_scalar

from .polynomial import Polynomial


class RemezError(RuntimeError):
    def __init__(self, msg, best=None, residual=None):
        super().__init__(msg)
        self.best = best
        self.residual = residual


@dataclass
class MinimaxFit:
    cheb: np.ndarray
    varpi: float
    reference: np.ndarray
    ref_errors: np.ndarray
    levelled: float
    iterations: int
    history: list = field(default_factory=list)

    def __call__(self, x):
        return C.chebval(2 * np.asarray(x, dtype=float) - 1, self.cheb)

    @property
    def polynomial(self) -> Polynomial:
        return cheb_to_monomial(self.cheb)

    def certificate(self) -> dict:
        signs = np.sign(self.ref_errors)
        alternating = bool(np.all(signs[1:] == -signs[:-1])) if self.varpi > 0 else True
        return {
            "points": self.reference.tolist(),
            "errors": self.ref_errors.tolist(),
            "alternations": int(len(self.reference)),
            "alternating": alternating,
            "varpi": self.varpi,
            "levelled_error": self.levelled,
            "max_deviation": float(np.max(np.abs(np.abs(self.ref_errors) - self.varpi)))
            if len(self.ref_errors) else 0.0,
            "iterations": self.iterations,
        }


def cheb_to_monomial(cheb) -> Polynomial:
    """Exact monomial coefficients of ``sum c_j T_j(2x - 1)`` (floats taken as exact rationals)."""
    y = Polynomial([Fraction(-1), Fraction(2)])
    t_prev, t_cur = Polynomial([Fraction(1)]), y
    acc = Polynomial([Fraction(0)])
    for j, c in enumerate(cheb):
        c = Fraction(float(c))
        if j == 0:
            acc = acc + t_prev.scale(c)
            continue
        if j > 1:
            t_prev, t_cur = t_cur, (y * t_cur).scale(Fraction(2)) - t_prev
        acc = acc + t_cur.scale(c)
    return acc


def _theta_to_x(theta):
    return 0.5 * (1.0 - np.cos(theta))


def _solve_reference(S_vals, x, s):
    n = s + 2
    V = C.chebvander(2 * x - 1, s)
    A = np.hstack([V, ((-1.0) ** np.arange(n))[:, None]])
    sol = np.linalg.solve(A, S_vals)
    return sol[:-1], sol[-1]


def _local_extrema(err_fn: Callable, s: int, grid: int):
    theta = np.linspace(0.0, np.pi, grid)
    e = err_fn(_theta_to_x(theta))
    idx = [0]
    de = np.diff(e)
    for i in range(1, grid - 1):
        if de[i - 1] * de[i] <= 0 and (de[i - 1] != 0 or de[i] != 0):
            idx.append(i)
    idx.append(grid - 1)
    pts, vals = [], []
    for i in idx:
        if i in (0, grid - 1):
            th = theta[i]
            pts.append(_theta_to_x(th))
            vals.append(e[i])
            continue
        sgn = 1.0 if e[i] >= 0 else -1.0
        res = minimize_scalar(lambda th: -sgn * err_fn(_theta_to_x(np.array([th])))[0],
                              bounds=(theta[i - 1], theta[i + 1]), method="bounded",
                              options={"xatol": 1e-13})
        th = res.x if -res.fun >= sgn * e[i] else theta[i]
        x = _theta_to_x(th)
        pts.append(float(x))
        vals.append(float(err_fn(np.array([x]))[0]))
    return np.array(pts), np.array(vals)


def _alternating_subset(pts, vals, need):
    # collapse runs of equal sign to their largest member
    keep_p, keep_v = [], []
    for p, v in zip(pts, vals):
        if keep_v and np.sign(v) == np.sign(keep_v[-1]):
            if abs(v) > abs(keep_v[-1]):
                keep_p[-1], keep_v[-1] = p, v
        else:
            keep_p.append(p)
            keep_v.append(v)
    keep_p, keep_v = list(keep_p), list(keep_v)
    while len(keep_p) > need:
        if abs(keep_v[0]) < abs(keep_v[-1]):
            keep_p.pop(0)
            keep_v.pop(0)
        else:
            keep_p.pop()
            keep_v.pop()
    return np.array(keep_p), np.array(keep_v)


def best_poly_approx(S: Callable, s: int, max_iter: int = 100, tol: float = 1e-13,
                     grid: int | None = None) -> MinimaxFit:
    """Minimax polynomial of degree ``s`` for ``S`` on [0, 1].

    Parameters
    ----------
    S : callable
        Vectorised function on [0, 1].
    s : int
        Polynomial degree.
    max_iter : int
        Exchange iterations before giving up.
    tol : float
        Stop once the largest error exceeds the levelled error by at most
        ``tol * (1 + varpi)``.

    Returns
    -------
    MinimaxFit
        Chebyshev coefficients, the error ``varpi`` and an alternation set of
        ``s + 2`` points.
    """
    if s < 0:
        raise ValueError("degree must be >= 0")
    grid = grid or max(4001, 400 * (s + 2))
    need = s + 2
    x = _theta_to_x(np.pi * np.arange(need) / (need - 1))
    best = None
    history = []
    for it in range(1, max_iter + 1):
        coef, E = _solve_reference(S(x), x, s)

        def err_fn(z, coef=coef):
            return S(z) - C.chebval(2 * z - 1, coef)

        pts, vals = _local_extrema(err_fn, s, grid)
        maxerr = float(np.max(np.abs(vals)))
        history.append((abs(E), maxerr))
        if best is None or maxerr < best[1]:
            best = (coef, maxerr)
        if maxerr <= 1e-15:
            return MinimaxFit(coef, 0.0, x, err_fn(x), 0.0, it, history)
        if maxerr - abs(E) <= tol * (1 + maxerr):
            ref_err = err_fn(x)
            return MinimaxFit(coef, maxerr, x, ref_err, abs(E), it, history)
        new_x, new_v = _alternating_subset(pts, vals, need)
        if len(new_x) < need:
            # fall back to a single-point exchange of the global maximiser
            new_x = _single_exchange(x, err_fn(x), pts[np.argmax(np.abs(vals))],
                                     vals[np.argmax(np.abs(vals))])
        x = np.sort(new_x)
    raise RemezError(f"Remez exchange did not converge in {max_iter} iterations",
                     best=best[0], residual=best[1])


def _single_exchange(x, ex, xnew, enew):
    x = list(x)
    ex = list(ex)
    pos = np.searchsorted(x, xnew)
    if pos == 0:
        if np.sign(ex[0]) == np.sign(enew):
            x[0] = xnew
        else:
            x = [xnew] + x[:-1]
    elif pos == len(x):
        if np.sign(ex[-1]) == np.sign(enew):
            x[-1] = xnew
        else:
            x = x[1:] + [xnew]
    else:
        if np.sign(ex[pos - 1]) == np.sign(enew):
            x[pos - 1] = xnew
        else:
            x[pos] = xnew
    return np.array(x)


def varpi(S: Callable, s: int) -> float:
    return best_poly_approx(S, s).varpi
