"""Certified real-root isolation on an interval via Sturm sequences."""
from __future__ import annotations

from fractions import Fraction

from .polynomial import Polynomial, gcd

ROOT_WIDTH = Fraction(1, 2**50)


class RootIsolationError(RuntimeError):
    pass


def squarefree_part(P: Polynomial) -> Polynomial:
    g = gcd(P, P.derivative())
    if g.degree == 0:
        return P
    return P.divmod(g)[0]


def sturm_sequence(P: Polynomial) -> list[Polynomial]:
    seq = [P, P.derivative()]
    while not seq[-1].is_zero() and seq[-1].degree > 0:
        rem = seq[-2] % seq[-1]
        if rem.is_zero():
            break
        seq.append(-rem)
    return seq


def sign_changes(seq: list[Polynomial], x: Fraction) -> int:
    changes, last = 0, 0
    for p in seq:
        v = p(x)
        if v == 0:
            continue
        s = 1 if v > 0 else -1
        if last and s != last:
            changes += 1
        last = s
    return changes


def count_roots(seq, a: Fraction, b: Fraction) -> int:
    """Number of distinct roots in the half-open interval ``(a, b]``."""
    return sign_changes(seq, a) - sign_changes(seq, b)


def isolate_roots(P: Polynomial, lo=Fraction(0), hi=Fraction(1),
                  width: Fraction = ROOT_WIDTH, max_depth: int = 400) -> list[Fraction]:
    """Distinct real roots of ``P`` in the open interval ``(lo, hi)``.

    Each root is returned as a rational lying within ``width`` of the true root
    (exact if the root is rational and hit by bisection).
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if P.is_zero():
        raise RootIsolationError("zero polynomial has no isolated roots")
    if P.degree == 0:
        return []
    sf = squarefree_part(P)
    seq = sturm_sequence(sf)
    roots: list[Fraction] = []
    stack = [(lo, hi, 0)]
    while stack:
        a, b, depth = stack.pop()
        k = count_roots(seq, a, b)
        if b == hi and sf(hi) == 0:
            k -= 1
        if k <= 0:
            continue
        if depth > max_depth:
            raise RootIsolationError(f"could not separate roots in ({float(a)}, {float(b)})")
        if k == 1:
            roots.append(_refine(sf, a, b, width, hi))
            continue
        mid = (a + b) / 2
        if sf(mid) == 0 and mid not in roots:
            roots.append(mid)
        stack.append((mid, b, depth + 1))
        stack.append((a, mid, depth + 1))
    return sorted(set(roots))


def _refine(sf: Polynomial, a: Fraction, b: Fraction, width: Fraction, hi: Fraction) -> Fraction:
    # exactly one simple root in (a, b]; (a, b) unless b is the root itself
    fb = sf(b)
    if fb == 0 and b != hi:
        return b
    fa = sf(a)
    if fa == 0:
        # a is a neighbouring root; the sign just to its right is that of sf'(a)
        fa = sf.derivative()(a)
    while b - a > width:
        mid = (a + b) / 2
        fm = sf(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return (a + b) / 2
