"""Two-fuzzy-hypotheses machinery: bump counts, Bayesian likelihood ratio,
functional intervals and their separation, and the Monte Carlo experiment."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np

from .family import (BumpProfile, Constants, DensityFamily, Functional, SelectionInputs,
                     sample, select_parameters)
from .measures.measure import WORK_DPS, MomentMeasure, Term, to_mp
from .measures.priors import MeasurePair, build_pair_prop1, build_pair_prop2
from .measures.targets import parse_target
from .rates import ClassParams

EPSILON = 2.0 ** -6
SERIES_SWITCH = 1.0


@dataclass(frozen=True)
class CountVector:
    """Observations outside every bump (``n0``) and inside each bump."""

    n0: int
    per_bump: np.ndarray

    @property
    def n(self) -> int:
        return int(self.n0 + self.per_bump.sum())

    def histogram(self) -> dict:
        """``{k: number of bumps holding exactly k points}`` for k >= 1."""
        vals, cnt = np.unique(self.per_bump[self.per_bump > 0], return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}


def counts(fam: DensityFamily, x) -> CountVector:
    x = np.asarray(x, dtype=float).reshape(-1, fam.d)
    idx = fam.locate(x)
    hit = idx[idx >= 0]
    per = np.bincount(hit, minlength=fam.M).astype(np.int64)
    return CountVector(int(x.shape[0] - hit.size), per)


# ----------------------------------------------------------------------------
# gamma_{m, pi}


def _moment_cached(pi: MomentMeasure, k: int):
    cache = pi._cache.setdefault("int_moments", {})
    if k not in cache:
        with mp.workdps(WORK_DPS):
            cache[k] = to_mp(pi.integrate_terms([Term(Fraction(1), k)]))
    return cache[k]


def _piece_exp_integral(piece, k: int, c):
    """``int y^k exp(-c y) density(y) dy`` over one piece with ``c > 1``."""
    lo, hi = to_mp(piece.lo), to_mp(piece.hi)
    total = mp.mpf(0)
    coeffs = piece.poly.coeffs
    if coeffs:
        top = k + len(coeffs) - 1
        # I_j = int_lo^hi y^j e^{-cy} by the upward integration-by-parts recurrence
        el, eh = mp.exp(-c * lo), mp.exp(-c * hi)
        I = (el - eh) / c
        table = [I]
        for j in range(1, top + 1):
            I = (lo ** j * el - hi ** j * eh) / c + j * I / c
            table.append(I)
        for j, a in enumerate(coeffs):
            if a != 0:
                total += to_mp(a) * table[k + j]
    for t in piece.extra:
        f = lambda y, t=t: t.value_mp(y) * y ** k * mp.exp(-c * y)
        total += mp.quad(f, [lo, hi])
    return total


def gamma_m_mp(pi: MomentMeasure, n_m: int, c) -> mp.mpf:
    """``int y^n_m exp(-c y) pi(dy)`` in extended precision."""
    if c < 0:
        raise ValueError("c = D * n0 must be nonnegative")
    with mp.workdps(WORK_DPS + 20):
        c = to_mp(c)
        total = mp.mpf(0)
        for loc, mass in pi.atoms:
            loc = to_mp(loc)
            total += to_mp(mass) * (loc ** n_m if n_m else mp.mpf(1)) * mp.exp(-c * loc)
        if not pi.pieces:
            return +total
        if c == 0:
            return total + _pieces_moment(pi, n_m)
        if c <= SERIES_SWITCH:
            term_sum = mp.mpf(0)
            coef = mp.mpf(1)
            i = 0
            while True:
                contrib = coef * _pieces_moment(pi, n_m + i)
                term_sum += contrib
                i += 1
                coef *= -c / i
                if abs(coef) < mp.mpf(10) ** (-(WORK_DPS + 5)):
                    break
            return total + term_sum
        for piece in pi.pieces:
            total += _piece_exp_integral(piece, n_m, c)
        return total


def _pieces_moment(pi: MomentMeasure, k: int):
    atoms = mp.mpf(0)
    for loc, mass in pi.atoms:
        atoms += to_mp(mass) * (to_mp(loc) ** k if k else mp.mpf(1))
    return _moment_cached(pi, k) - atoms


def gamma_m(pi: MomentMeasure, n_m: int, n0: int, D: float) -> float:
    """Bayesian likelihood factor ``int_0^1 y^n_m exp(-D n0 y) pi(dy)``."""
    if D < 0:
        raise ValueError("D must be nonnegative")
    return float(gamma_m_mp(pi, int(n_m), D * n0))


def log_upsilon(pair: MeasurePair, fam: DensityFamily, cv: CountVector,
                e1: float | None = None) -> float:
    """``ln`` of the likelihood ratio, grouped by distinct bump counts."""
    if pair.mu is pair.nu:
        return 0.0
    e1 = float(pair.mu.moment_mp(1)) if e1 is None else e1
    D = fam.D(e1)
    c = D * cv.n0
    groups = cv.histogram()
    groups[0] = int(fam.M - sum(groups.values()))
    parts = []
    with mp.workdps(WORK_DPS):
        for k, mult in sorted(groups.items()):
            if mult == 0:
                continue
            g_mu, g_nu = gamma_m_mp(pair.mu, k, c), gamma_m_mp(pair.nu, k, c)
            if g_nu <= 0 or g_mu <= 0:
                raise FloatingPointError(f"likelihood factor vanished for bump count {k}")
            parts.append(float(mult * (mp.log(g_mu) - mp.log(g_nu))))
    return math.fsum(parts)


def upsilon(pair: MeasurePair, fam: DensityFamily, x) -> float:
    return math.exp(log_upsilon(pair, fam, counts(fam, x)))


# ----------------------------------------------------------------------------
# functional intervals


def S_terms(F: Functional, A: float, profile: BumpProfile) -> list[Term]:
    """``S(A y)`` written as a sum of ``c y^a (ln y)^k`` terms."""
    if F.kind == "Entropy":
        lam = math.log(A) + profile.entropy_integral()
        return [Term(-A * lam, 1, 0), Term(-A, 1, 1)]
    npp = profile.norm_power(F.p)
    if F.kind == "Tsallis":
        return [Term(A, 1, 0), Term(-A ** F.p * npp, F.p, 0)]
    return [Term(A ** F.p * npp, F.p, 0)]


def _square(terms: list[Term]) -> list[Term]:
    return [a.times(b) for a in terms for b in terms]


def E_V(pi: MomentMeasure, F: Functional, A: float, profile: BumpProfile) -> tuple:
    """``E_pi(A) = int S(Ay) pi(dy)`` and ``V_pi(A) = (int S(Ay)^2 pi(dy))^(1/2)``."""
    t = S_terms(F, A, profile)
    E = float(pi.integrate_terms(t))
    V2 = float(pi.integrate_terms(_square(t)))
    if not (math.isfinite(E) and math.isfinite(V2)) or V2 < 0:
        raise ValueError("E_pi or V_pi is not finite for this measure")
    return E, math.sqrt(V2)


@dataclass(frozen=True)
class IntervalJ:
    lo: float
    hi: float
    center: float
    alpha: float
    E: float = float("nan")
    V: float = float("nan")

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError("interval endpoints out of order")


def eta_S0(F: Functional, fam: DensityFamily, x: float, delta_: float,
           grid: int = 4001) -> float:
    """Local modulus of continuity of ``S0`` at ``x`` with radius ``delta_``.

    Power ``H``: the Lipschitz bound ``p ||f0||_p^p delta``. Other kinds:
    a dense grid over ``[x - delta, x + delta]`` clipped to ``[0, 1]``.
    """
    if F.kind in ("LpNorm", "IntegralPower", "Renyi"):
        return F.p * fam.base.norm_power(F.p) * delta_
    ys = np.linspace(max(0.0, x - delta_), min(1.0, x + delta_), grid)
    ys = np.concatenate([ys, [x]])
    vals = np.asarray(F.S0(ys, fam.base), dtype=float)
    return float(np.max(np.abs(vals - float(F.S0(x, fam.base)))))


def interval_J(pi: MomentMeasure, fam: DensityFamily, F: Functional, upsilon_: float,
               e1: float | None = None) -> IntervalJ:
    """Interval of plausible functional values when the bump weights follow ``pi``."""
    A, m, M = fam.A, fam.m_vol, fam.M
    e1 = float(pi.moment_mp(1)) if e1 is None else e1
    E, V = E_V(pi, F, A, fam.profile)
    x0 = A * m * M * e1
    center = float(F.S0(x0, fam.base)) + m * M * E
    alpha = eta_S0(F, fam, x0, A * m * math.sqrt(upsilon_ * M)) + m * math.sqrt(upsilon_ * M) * V
    ends = F.G(np.array([center - alpha, center + alpha]))
    return IntervalJ(float(np.min(ends)), float(np.max(ends)), center, alpha, E, V)


def interval_gap(a: IntervalJ, b: IntervalJ) -> float:
    """Distance between two intervals (zero when they intersect)."""
    return max(0.0, b.lo - a.hi, a.lo - b.hi)


def delta(pair: MeasurePair, fam: DensityFamily, F: Functional, upsilon_: float) -> float:
    e1 = float(pair.mu.moment_mp(1))
    return interval_gap(interval_J(pair.mu, fam, F, upsilon_, e1),
                        interval_J(pair.nu, fam, F, upsilon_, e1))


# ----------------------------------------------------------------------------
# binomial tail


def log_binomial_tail_bound(n: int, prob: float, z: float) -> float:
    """``ln[(p n / z)^z e^(z - p n)]`` for ``p n <= z <= n``."""
    pn = prob * n
    if not (0 <= prob <= 1) or z > n or z < pn * (1 - 1e-15) - 1e-300:
        raise ValueError(f"z={z} outside [p n, n] = [{pn}, {n}]")
    if z == 0:
        return 0.0
    if pn == 0:
        return -math.inf
    return z * math.log(pn / z) + z - pn


def binomial_tail_bound(n: int, prob: float, z: float) -> float:
    """Upper bound on ``P(Binomial(n, prob) >= z)``."""
    return math.exp(log_binomial_tail_bound(n, prob, z))


def c_star(upsilon_: float, eps: float = EPSILON) -> float:
    """Constant multiplying the interval separation in the risk bound.

    Returns ``nan`` when the bracket is non-positive (the bound is void).
    """
    inner = 1.0 / 3.0 - 1.0 / upsilon_ - math.sqrt(2.0 * (eps + 2.0 / upsilon_))
    if inner <= 0:
        return float("nan")
    return (36.0 * math.e) ** -0.5 * math.sqrt(inner)


# ----------------------------------------------------------------------------
# Monte Carlo experiment


@dataclass(frozen=True)
class PairSpec:
    """``prop1`` (moment ``t`` mismatched up to ``s``), ``prop2`` (matched up
    to ``s``, separated on ``target``), or ``identical`` (the ``prop1`` design
    with both priors set to its second measure)."""

    mode: str = "prop1"
    s: int = 2
    t: int = 2
    target: str = "power:2.5"

    def build(self) -> MeasurePair:
        return _build_pair(self)

    def likelihood_pair(self) -> MeasurePair:
        pair = self.build()
        if self.mode == "identical":
            return MeasurePair(pair.nu, pair.nu, 10 ** 9, None, 0.0, {"degenerate": True})
        return pair


@lru_cache(maxsize=16)
def _build_pair(spec: PairSpec) -> MeasurePair:
    if spec.mode in ("prop1", "identical"):
        return build_pair_prop1(spec.s, spec.t)
    if spec.mode == "prop2":
        return build_pair_prop2(parse_target(spec.target), spec.s)
    raise ValueError(f"unknown pair mode {spec.mode!r}")


@dataclass(frozen=True)
class LBConfig:
    params: ClassParams
    n: int
    r: int
    pair: PairSpec = PairSpec()
    functional: Functional = Functional("LpNorm", 2.0)
    reps: int = 100
    seed: int = 0
    constants: Constants = Constants()
    threads: int = 1


@dataclass
class LBReport:
    feasible: bool
    reps: int
    seed: int
    M: int | None = None
    upsilon: float | None = None
    delta: float | None = None
    c_star: float | None = None
    lower_bound: float | None = None
    p_upsilon_half: float | None = None
    p_upsilon_half_stderr: float | None = None
    freq_rho_concentration: float | None = None
    freq_rho_concentration_stderr: float | None = None
    freq_S_concentration: float | None = None
    freq_S_concentration_stderr: float | None = None
    freq_counts_small: float | None = None
    freq_eta_bounded: float | None = None
    count_threshold: int | None = None
    implication_holds: bool | None = None
    implication_checked: int = 0
    rows: list = field(default_factory=list)
    selection: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("rows")
        return d


ROW_FIELDS = ("rep", "log_upsilon", "upsilon_ge_half", "rho_concentrated", "S_concentrated",
              "counts_small", "eta_bounded", "n0", "max_count", "rho")


@lru_cache(maxsize=4)
def _setup(cfg: LBConfig):
    pair = cfg.pair.build()
    sel = select_parameters(SelectionInputs(cfg.params, cfg.n, cfg.r, pair, cfg.constants))
    return pair, sel


def _bernoulli(flags) -> tuple[float, float]:
    flags = np.asarray(flags, dtype=float)
    p = float(flags.mean())
    return p, math.sqrt(p * (1 - p) / flags.size)


def _replicate(cfg: LBConfig, idx: range) -> list[tuple]:
    pair, sel = _setup(cfg)
    fam = sel.family
    lik = cfg.pair.likelihood_pair()
    F = cfg.functional
    ups = cfg.constants.upsilon_for(cfg.params.d)
    M = fam.M
    e1 = float(pair.nu.moment_mp(1))
    E_nu, V_nu = E_V(pair.nu, F, fam.A, fam.profile)
    thresh = _count_threshold(cfg)
    t_eta = cfg.params.p if cfg.params.p_is_integer else cfg.r
    sampler = pair.nu.sampler()
    rows = []
    for i in idx:
        rng = np.random.default_rng([cfg.seed, i])
        zeta = sampler.draw(M, rng)
        rho = math.fsum(zeta)
        rho_ok = abs(rho - M * e1) <= math.sqrt(ups * M)
        s_sum = math.fsum(np.asarray(F.S(fam.A * zeta, fam.profile), dtype=float))
        s_ok = abs(s_sum - M * E_nu) <= math.sqrt(ups * M) * V_nu
        x = sample(fam, zeta, cfg.n, rng)
        cv = counts(fam, x)
        lu = log_upsilon(lik, fam, cv, e1)
        hist = cv.histogram()
        max_count = max(hist) if hist else 0
        eta = dict(hist)
        eta[0] = M - sum(hist.values())
        eta_ok = all(eta.get(k, 0) <= M ** (1 - k / t_eta) for k in range(int(t_eta)))
        rows.append((i, lu, lu >= -math.log(2.0), rho_ok, s_ok, max_count <= thresh,
                     eta_ok, cv.n0, max_count, rho))
    return rows


def _count_threshold(cfg: LBConfig) -> int:
    p = cfg.params.p
    return int(round(p)) - 1 if cfg.params.p_is_integer else cfg.r - 1


def run_lb_experiment(cfg: LBConfig) -> LBReport:
    """Monte Carlo estimate of the probability that the likelihood ratio
    exceeds one half under the second prior, with the concentration and
    count events, and the implied lower-bound constant."""
    pair, sel = _setup(cfg)
    rep = LBReport(feasible=sel.feasible, reps=cfg.reps, seed=cfg.seed, selection=sel.as_dict())
    if not sel.feasible:
        rep.notes.append("parameter selection infeasible: " + "; ".join(map(str, sel.violated)))
        return rep
    fam = sel.family
    ups = cfg.constants.upsilon_for(cfg.params.d)
    rep.M, rep.upsilon = fam.M, ups
    rep.delta = delta(pair, fam, cfg.functional, ups)
    rep.c_star = c_star(ups)
    if math.isnan(rep.c_star):
        rep.notes.append("C* bracket is non-positive for this upsilon; the bound is void")
    rep.lower_bound = rep.c_star * rep.delta
    rep.count_threshold = _count_threshold(cfg)

    chunks = [range(a, min(a + 25, cfg.reps)) for a in range(0, cfg.reps, 25)]
    if cfg.threads > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
            parts = list(ex.map(_replicate, [cfg] * len(chunks), chunks))
    else:
        parts = [_replicate(cfg, c) for c in chunks]
    rows = [row for part in parts for row in part]
    rep.rows = rows
    cols = list(zip(*rows))
    rep.p_upsilon_half, rep.p_upsilon_half_stderr = _bernoulli(cols[2])
    rep.freq_rho_concentration, rep.freq_rho_concentration_stderr = _bernoulli(cols[3])
    rep.freq_S_concentration, rep.freq_S_concentration_stderr = _bernoulli(cols[4])
    rep.freq_counts_small = _bernoulli(cols[5])[0]
    rep.freq_eta_bounded = _bernoulli(cols[6])[0]
    checked = [row for row in rows if row[5]]
    rep.implication_checked = len(checked)
    rep.implication_holds = all(row[2] for row in checked)
    return rep
