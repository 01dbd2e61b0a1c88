"""Functions on [0, 1] approximated by polynomials when building priors."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath as mp
import numpy as np

from .measure import Term, integrate_term, to_mp


@dataclass(frozen=True)
class TargetFunction:
    """A continuous function on [0, 1].

    ``terms`` (when given) expresses the function as a sum of
    ``c * x**a * ln(x)**k`` so that its moments have closed forms; otherwise
    moments fall back to extended-precision quadrature of ``mp_func``.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    mp_func: Callable
    terms: tuple = ()

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def moment(self, k: int):
        """``int_0^1 S(x) x**k dx``; exact Fraction when the terms allow it."""
        if self.terms:
            total = 0
            for t in self.terms:
                total = total + integrate_term(t.times_power(k), Fraction(0), Fraction(1))
            return total
        return mp.quad(lambda x: self.mp_func(x) * x ** k, [0, 0.5, 1])

    def l2_squared(self):
        if self.terms:
            total = 0
            for a in self.terms:
                for b in self.terms:
                    total = total + integrate_term(a.times(b), Fraction(0), Fraction(1))
            return total
        return mp.quad(lambda x: self.mp_func(x) ** 2, [0, 0.5, 1])

    def value_mp(self, x):
        return self.mp_func(to_mp(x))


def power(alpha) -> TargetFunction:
    """``x**alpha`` on [0, 1] with ``alpha > 0``."""
    alpha_exact = Fraction(alpha).limit_denominator(10**6) if not isinstance(alpha, Fraction) else alpha
    if float(alpha_exact) != float(alpha):
        alpha_exact = Fraction(float(alpha))
    a = float(alpha)
    if a <= 0:
        raise ValueError("power target needs alpha > 0")
    a_mp = to_mp(alpha_exact)
    return TargetFunction(f"power:{a:g}", lambda x: np.power(x, a),
                          lambda x: x ** a_mp if x > 0 else mp.mpf(0),
                          (Term(Fraction(1), alpha_exact, 0),))


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def entropy() -> TargetFunction:
    """``x ln x`` extended by continuity at 0."""
    return TargetFunction("entropy", _xlogx,
                          lambda x: x * mp.log(x) if x > 0 else mp.mpf(0),
                          (Term(Fraction(1), 1, 1),))


def parse_target(spec: str) -> TargetFunction:
    """``"power:2.5"`` or ``"entropy"``."""
    spec = spec.strip()
    if spec == "entropy":
        return entropy()
    if spec.startswith("power:"):
        return power(float(spec.split(":", 1)[1]))
    raise ValueError(f"unknown functional {spec!r}; expected power:<p> or entropy")
