"""Acceptance checks 1-11.

Each check prints one ``PASS``/``FAIL`` line with its measured numbers. Run
``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or ``python tests/test_acceptance.py`` to run them without
pytest.
"""
from __future__ import annotations

import math
import os
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest
from scipy import stats

sys.path.insert(0, str(Path(__file__).parent))

from oracles import (apply_rule, family_rule, function_l1_quad, hilbert_inverse_closed_form,  # noqa: E402
                     log_binomial_tails, lp_minimax, measure_integral_quad, polynomial_l1_quad)

from lpnorm_minimax.estimators import GaussianDensity, risk_mc  # noqa: E402
from lpnorm_minimax.family import (BaseDensity, BumpProfile, DensityFamily, Functional,  # noqa: E402
                                   SelectionInputs, bump_cdf, eval_density, integral_H, sample,
                                   select_parameters)
from lpnorm_minimax.fuzzy import (LBConfig, PairSpec, delta, log_binomial_tail_bound,  # noqa: E402
                                  run_lb_experiment)
from lpnorm_minimax.measures import (best_poly_approx, build_pair_prop1, build_pair_prop2,  # noqa: E402
                                     entropy, hilbert_inverse_apply, hilbert_matvec, moment,
                                     moment_exact, power)
from lpnorm_minimax.rates import (INF, DZone, classify_D_sets, make_params, rate_integer,  # noqa: E402
                                  rate_noninteger, tau)

RESULTS: dict[int, str] = {}
WORKERS = max(1, min(4, os.cpu_count() or 1))


def _record(num: int, name: str, ok: bool, detail: str, elapsed: float, limit: float) -> None:
    in_time = elapsed < limit
    status = "PASS" if ok and in_time else "FAIL"
    timing = f"{elapsed:.1f}s of {limit:g}s"
    if ok and not in_time:
        detail += "; over the time budget"
    line = f"criterion {num:2d} {name}: {status} ({detail}; {timing})"
    RESULTS[num] = line
    print(line, flush=True)
    assert status == "PASS", line


def _timed(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


# ---------------------------------------------------------------------------
# 1


def check_hilbert_exactness():
    rng = random.Random(20240601)
    bad = 0
    for s in range(1, 13):
        for _ in range(10):
            rhs = [Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**6)) for _ in range(s + 1)]
            if hilbert_matvec(s, hilbert_inverse_apply(s, rhs)) != rhs:
                bad += 1
    return bad == 0, f"{120 - bad}/120 exact round trips"


def test_criterion_01_hilbert_exactness():
    _record(1, "hilbert_exactness", *_timed(check_hilbert_exactness), limit=5)


# ---------------------------------------------------------------------------
# 2


def check_moment_matched_pairs():
    notes, ok = [], True
    for s, t in [(2, 2), (4, 2), (6, 3), (8, 4)]:
        pr = build_pair_prop1(s, t)
        match = all(moment_exact(pr.mu, k) == moment_exact(pr.nu, k)
                    for k in range(1, s + 1) if k != t)
        l1 = polynomial_l1_quad(pr.certificate["coefficients"], pr.certificate["roots"])
        inv_tt = hilbert_inverse_closed_form(s)[t][t]
        floor = inv_tt ** -0.5
        gap_ok = pr.gap > 0 and abs(pr.gap - 1 / l1) <= 1e-9 * pr.gap and pr.gap >= floor * (1 - 1e-10)
        e_min = min(moment(m, z) for m in (pr.mu, pr.nu) for z in (0.5, 1, 2, 5, 10))
        ok &= match and gap_ok and e_min >= 0.5
        notes.append(f"({s},{t}) gap={pr.gap:.4g}>={floor:.4g} min e={e_min:.3f}")
    return ok, "; ".join(notes)


def test_criterion_02_moment_matched_pairs():
    _record(2, "moment_matched_pairs", *_timed(check_moment_matched_pairs), limit=10)


# ---------------------------------------------------------------------------
# 3


def check_remez_against_lp():
    worst, alt_ok, trend = 0.0, True, []
    for S in (power(2.5), power(0.5), entropy()):
        for s in range(2, 11):
            fit = best_poly_approx(S, s)
            cert = fit.certificate()
            lp = lp_minimax(S, s)
            worst = max(worst, abs(fit.varpi - lp) / (1e-7 * (1 + fit.varpi)))
            alt_ok &= cert["alternations"] == s + 2 and cert["alternating"]
            if S.name == "power:2.5":
                trend.append(fit.varpi * s ** 5)
    ok = worst <= 1 and alt_ok and min(trend) > 0.2
    return ok, (f"max |remez-lp|/(1e-7(1+varpi))={worst:.3g}, alternation sets ok={alt_ok}, "
                f"min s^5 varpi(x^2.5)={min(trend):.4f}")


def test_criterion_03_remez_against_lp_oracle():
    _record(3, "remez_against_lp_oracle", *_timed(check_remez_against_lp), limit=30)


# ---------------------------------------------------------------------------
# 4


def check_target_separating_pairs():
    worst_mom, worst_gap = 0.0, 0.0
    for S in (power(2.5), power(0.5), entropy()):
        f_mp = lambda y, S=S: S.value_mp(y) if y > 0 else mp.mpf(0)
        for s in (2, 4, 6):
            pr = build_pair_prop2(S, s)
            cert = pr.certificate
            for k in range(1, s + 1):
                worst_mom = max(worst_mom, abs(float(pr.mu.moment_mp(k) - pr.nu.moment_mp(k))))
            gap = float(measure_integral_quad(pr.mu, f_mp) - measure_integral_quad(pr.nu, f_mp))
            l1 = function_l1_quad(cert["K"], [float(r) for r in cert["roots"]])
            worst_gap = max(worst_gap, abs(gap - cert["varpi"] / l1))
    ok = worst_mom <= 1e-10 and worst_gap <= 1e-8
    return ok, f"max moment diff={worst_mom:.2g}, max |gap - varpi/||K||_1|={worst_gap:.2g}"


def test_criterion_04_target_separating_pairs():
    _record(4, "target_separating_pairs", *_timed(check_target_separating_pairs), limit=20)


# ---------------------------------------------------------------------------
# 5


def _chi2_family(fam, w, n, rng):
    """Chi-squared test of sample cell counts: two halves of the base cube and
    four equal-width sub-boxes per axis inside every bump box."""
    x = sample(fam, w, n, rng)
    d, am = fam.d, fam.A * fam.m_vol
    rho = math.fsum(w)
    edges = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    cell_p = np.diff(bump_cdf(edges))
    probs, obs = [], []
    mid = -(fam.base.N + 2.0) / (2.0 * fam.base.a)
    idx = fam.locate(x)
    base_pts = x[idx < 0]
    for side in (base_pts[:, 0] < mid, base_pts[:, 0] >= mid):
        probs.append(0.5 * (1 - am * rho))
        obs.append(int(side.sum()))
    sig = np.asarray(fam.sigma)
    for m in range(fam.M):
        u = (x[idx == m] - fam.centers([m])[0]) / sig
        cells = np.clip(np.searchsorted(edges, u, side="right") - 1, 0, 3)
        flat = np.ravel_multi_index(tuple(cells.T), (4,) * d)
        counts = np.bincount(flat, minlength=4 ** d)
        cp = cell_p
        for _ in range(d - 1):
            cp = np.outer(cp, cell_p).ravel()
        probs += list(am * w[m] * cp)
        obs += list(counts)
    probs, obs = np.array(probs), np.array(obs)
    keep = probs > 0
    return stats.chisquare(obs[keep], n * probs[keep] / probs[keep].sum()).pvalue


def check_family_identities():
    rng = np.random.default_rng(7)
    worst_mass, worst_dec, min_p = 0.0, 0.0, 1.0
    for d, M, p in ((1, 5, 2.5), (2, 4, 2.5)):
        sigma = 0.6
        fam = DensityFamily(BumpProfile(d), BaseDensity(d, 3.0), (sigma,) * d,
                            0.5 / (sigma ** d * M), M)
        F = Functional("LpNorm", p)
        rule = family_rule(fam)
        for _ in range(20):
            w = rng.uniform(size=M)
            vals = eval_density(fam, w, rule[0])
            worst_mass = max(worst_mass, abs(apply_rule(rule, vals) - 1))
            ref = apply_rule(rule, np.abs(vals) ** p)
            worst_dec = max(worst_dec, abs(integral_H(fam, w, F) - ref) / ref)
        w = rng.uniform(0.3, 1.0, size=M)
        min_p = min(min_p, _chi2_family(fam, w, 100_000, rng))
    ok = worst_mass <= 1e-8 and worst_dec <= 1e-8 and min_p > 1e-3
    return ok, (f"max |int f_w - 1|={worst_mass:.2g}, max rel decomposition error={worst_dec:.2g}, "
                f"min chi2 p-value={min_p:.3g}")


def test_criterion_05_family_identities():
    _record(5, "family_identities", *_timed(check_family_identities), limit=120)


# ---------------------------------------------------------------------------
# 6


def check_selection_algebra():
    rng = np.random.default_rng(0)
    worst, nonempty, sigma_bad = 0.0, 0, 0
    for _ in range(50):
        d = int(rng.integers(1, 3))
        beta = rng.uniform(0.5, 3.0, d)
        r = rng.choice([1.0, 2.0, 4.0, INF], d)
        p = float(rng.choice([2.0, 3.0, 2.5, 1.5]))
        rs = max(r)
        q = INF if (math.isinf(rs) or rng.uniform() < 0.5) else max(p, rs) * rng.uniform(1.1, 3.0)
        n = int(10 ** rng.uniform(2, 6))
        P = make_params(d, beta, r, p, q)
        spec = (PairSpec("prop1", max(2, int(p)), int(p)) if p.is_integer()
                else PairSpec("prop2", 4, None, f"power:{p}"))
        res = select_parameters(SelectionInputs(P, n, 2, spec.build()))
        if res.J is None:
            continue
        nonempty += 1
        worst = max([worst] + [v["rel_error"] for v in res.identities.values()])
        sigma_bad += max(res.sigma) > 1
    ok = nonempty > 0 and worst <= 1e-12 and sigma_bad == 0
    return ok, (f"{nonempty}/50 configurations with nonempty admissible set, "
                f"max identity rel error={worst:.2g}, sigma>1 in {sigma_bad}")


def test_criterion_06_selection_algebra():
    _record(6, "selection_algebra", *_timed(check_selection_algebra), limit=5)


# ---------------------------------------------------------------------------
# 7

LB_PARAMS = make_params(1, [1], [1], 2, 2)


def check_lower_bound_experiment():
    cfg = LBConfig(LB_PARAMS, 1000, 2, PairSpec("prop1", 2, 2), Functional("LpNorm", 2.0),
                   reps=500, seed=2024, threads=WORKERS)
    rep = run_lb_experiment(cfg)
    if not rep.feasible:
        return False, "selection infeasible"
    half = rep.p_upsilon_half >= 1 / 3 - 3 * rep.p_upsilon_half_stderr
    floor = 1 - 1 / rep.upsilon
    rho = rep.freq_rho_concentration >= floor - 3 * rep.freq_rho_concentration_stderr
    s_ok = rep.freq_S_concentration >= floor - 3 * rep.freq_S_concentration_stderr
    impl = bool(rep.implication_holds) and rep.implication_checked > 0
    ok = half and rho and s_ok and impl
    return ok, (f"M={rep.M}, P(Upsilon>=1/2)={rep.p_upsilon_half:.3f}+-{rep.p_upsilon_half_stderr:.3f}, "
                f"rho conc={rep.freq_rho_concentration:.3f}, S conc={rep.freq_S_concentration:.3f}, "
                f"implication on {rep.implication_checked}/{rep.reps} reps holds={rep.implication_holds}")


@pytest.mark.slow
def test_criterion_07_lower_bound_experiment():
    _record(7, "lower_bound_experiment", *_timed(check_lower_bound_experiment), limit=300)


# ---------------------------------------------------------------------------
# 8


def check_interval_separation():
    pair = PairSpec("prop1", 2, 2).build()
    res = select_parameters(SelectionInputs(LB_PARAMS, 1000, 2, pair))
    F = Functional("LpNorm", 2.0)
    ups = 128.0
    at_selected = delta(pair, res.family, F, ups)
    M_small = int(res.d_lower // 64)
    below = delta(pair, res.family.with_M(M_small), F, ups)
    ok = res.M >= res.d_lower and at_selected > 0 and below == 0.0
    return ok, (f"delta(M={res.M} >= d={res.d_lower:.1f})={at_selected:.3g}, "
                f"delta(M={M_small})={below}")


def test_criterion_08_interval_separation():
    _record(8, "interval_separation", *_timed(check_interval_separation), limit=1)


# ---------------------------------------------------------------------------
# 9


def check_binomial_tail():
    bad, checked = 0, 0
    for prob in (Fraction(1, 100), Fraction(5, 100), Fraction(1, 10), Fraction(3, 10),
                 Fraction(1, 2)):
        for n in range(1, 201):
            tails = log_binomial_tails(n, prob)
            for z in range(math.ceil(prob * n), n + 1):
                checked += 1
                bound = log_binomial_tail_bound(n, float(prob), z)
                if bound < tails[z] - 1e-12 * max(1.0, abs(tails[z])):
                    bad += 1
    return bad == 0, f"{checked - bad}/{checked} (n, prob, z) cases bounded"


def test_criterion_09_binomial_tail():
    _record(9, "binomial_tail", *_timed(check_binomial_tail), limit=5)


# ---------------------------------------------------------------------------
# 10


def check_plugin_rate():
    P = make_params(1, [2.0], [INF], 2.5, INF)
    predicted = rate_noninteger(P).exponent
    rep = risk_mc(GaussianDensity(1, 1.0), [2 ** k for k in range(10, 15)], 200, 2.5, [2.0],
                  seed=31, bandwidth_scale=2.0, predicted=predicted, threads=WORKERS)
    ok = abs(rep.slope + predicted) <= 0.15
    return ok, (f"slope={rep.slope:.3f}+-{rep.slope_stderr:.3f}, predicted -{predicted:.3f}, "
                f"margin={abs(rep.slope + predicted):.3f}")


@pytest.mark.slow
def test_criterion_10_plugin_rate():
    _record(10, "plugin_rate", *_timed(check_plugin_rate), limit=600)


# ---------------------------------------------------------------------------
# 11


def check_rate_calculator():
    notes, ok = [], True
    # r = inf, integer p: theta = beta / (beta + 1)
    for beta in (0.25, 0.5, 1.0, 2.0, 5.0):
        res = rate_integer(make_params(1, [beta], [INF], 2, INF))
        ok &= abs(res.raw - beta / (beta + 1)) <= 1e-14
        ok &= res.exponent == min(0.5, beta / (beta + 1))
    notes.append("theta=beta/(beta+1) for 5 betas")
    # q = inf reduction: omega/p in the zone tau(p) < 1 - 1/p, tau(inf) < 0
    P = make_params(2, [1, 1], [1, 1], 2.5, INF)
    omega = 1 / sum(1 / (b * r) for b, r in zip(P.beta, P.r))
    assert tau(P, 2.5) < 1 - 1 / 2.5 and tau(P, INF) < 0
    ok &= abs(rate_noninteger(P).exponent - omega / 2.5) <= 1e-14
    notes.append(f"vartheta={rate_noninteger(P).exponent:.4f}=omega/p")
    # gamma pairs by exact rational arithmetic
    checked = 0
    for d, beta, r, p in (((1,), (Fraction(2),), (None,), Fraction(3, 2)),
                          ((2,), (Fraction(1), Fraction(1)), (Fraction(1), Fraction(1)), Fraction(5, 2)),
                          ((2,), (Fraction(3), Fraction(3, 2)), (None, Fraction(2)), Fraction(7, 4))):
        d = d[0]
        ib = sum(1 / b for b in beta)
        io = sum(1 / (b * rr) for b, rr in zip(beta, r) if rr is not None)
        t_of = lambda s: 1 - io + (ib / s if s is not None else 0)
        t1, tp, tinf = t_of(Fraction(1)), t_of(p), t_of(None)
        cls = classify_D_sets(make_params(d, [float(b) for b in beta],
                                          [INF if rr is None else float(rr) for rr in r],
                                          float(p), INF))
        if tp > 2 * (1 - 1 / p):
            g1, g2 = (2 * (1 - 1 / p) - tp) / t1, d - 1 + (1 - 1 / p) / t1
            ok &= cls.zone is DZone.D1
        elif tp < 1 - 2 / p and tinf < 0:
            g1 = g2 = 1 / (io * p)
            ok &= cls.zone is DZone.D2
        else:
            ok &= cls.zone is DZone.NEITHER
            continue
        ok &= abs(cls.gamma1 - float(g1)) <= 1e-14 and abs(cls.gamma2 - float(g2)) <= 1e-14
        checked += 1
    notes.append(f"gamma pairs exact in {checked} zones")
    return ok, ", ".join(notes)


def test_criterion_11_rate_calculator():
    _record(11, "rate_calculator", *_timed(check_rate_calculator), limit=1)


CHECKS = [
    (1, "hilbert_exactness", check_hilbert_exactness, 5),
    (2, "moment_matched_pairs", check_moment_matched_pairs, 10),
    (3, "remez_against_lp_oracle", check_remez_against_lp, 30),
    (4, "target_separating_pairs", check_target_separating_pairs, 20),
    (5, "family_identities", check_family_identities, 120),
    (6, "selection_algebra", check_selection_algebra, 5),
    (7, "lower_bound_experiment", check_lower_bound_experiment, 300),
    (8, "interval_separation", check_interval_separation, 1),
    (9, "binomial_tail", check_binomial_tail, 5),
    (10, "plugin_rate", check_plugin_rate, 600),
    (11, "rate_calculator", check_rate_calculator, 1),
]


if __name__ == "__main__":
    failed = 0
    for num, name, fn, limit in CHECKS:
        try:
            _record(num, name, *_timed(fn), limit=limit)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
