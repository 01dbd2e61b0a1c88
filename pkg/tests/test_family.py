import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from lpnorm_minimax.family import (BaseDensity, BumpProfile, Constants, DensityFamily,
                                   Functional, SelectionInputs, build_base, bump_cdf,
                                   bump_power_integral, check_assumptions,
                                   check_assumptions_raw, eval_density, functional_value,
                                   integral_H, sample, select_parameters)
from lpnorm_minimax.fuzzy import PairSpec
from lpnorm_minimax.rates import INF, make_params

from oracles import apply_rule, family_rule

P_LB = make_params(1, [1], [1], 2, 2)


def small_family(d=1, N=3.0, M=4, sigma=0.6, load=0.5):
    return DensityFamily(BumpProfile(d), BaseDensity(d, N), (sigma,) * d,
                         load / (sigma ** d * M), M)


# ---------------------------------------------------------------------------
# bump profile and base density


def test_bump_profile_unit_mass():
    val, _ = integrate.quad(lambda u: float(BumpProfile(1)(np.array([[u]]))[0]), -1, 1,
                            epsabs=1e-14)
    assert val == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("z", [0.5, 1.5, 2.0, 3.7])
def test_bump_power_integral_matches_quad(z):
    prof = BumpProfile(1)
    val, _ = integrate.quad(lambda u: float(prof(np.array([[u]]))[0]) ** z, -1, 1,
                            epsabs=1e-14, epsrel=1e-12)
    assert bump_power_integral(z) == pytest.approx(val, rel=1e-10)


def test_bump_cdf_limits_and_monotone():
    u = np.linspace(-1.5, 1.5, 301)
    F = bump_cdf(u)
    assert F[0] == 0.0 and F[-1] == pytest.approx(1.0, abs=1e-14)
    assert np.all(np.diff(F) >= -1e-15)


@pytest.mark.parametrize("d,N", [(1, 2.0), (1, 7.5), (2, 3.0)])
def test_base_density_unit_mass(d, N):
    fam = DensityFamily(BumpProfile(d), BaseDensity(d, N), (0.5,) * d, 1e-3, 1)
    rule = family_rule(fam)
    mass = apply_rule(rule, BaseDensity(d, N)(rule[0]))
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_base_density_vanishes_off_negative_orthant():
    base = BaseDensity(2, 4.0)
    x = np.array([[0.01, -1.0], [-1.0, 0.3], [2.0, 2.0]])
    assert np.all(base(x) == 0.0)


@pytest.mark.parametrize("q", [3.0, 5.0, INF])
def test_build_base_meets_q_norm_target(q):
    P = make_params(1, [1], [2], 2, q)
    base = build_base(q, 1.0, P)
    if math.isinf(q):
        grid = np.linspace(-(base.N + 2), 0, 200001)
        val = float(np.max(base.marginal(grid)))
    else:
        f = lambda y: float(base.marginal(np.array([y]))[0]) ** q
        val, _ = integrate.quad(f, -(base.N + 2), 0, points=[-base.N, -2.0], limit=400,
                                epsabs=1e-14)
        val = val ** (1 / q)
    assert val <= 0.5 * (1 + 1e-8)


def test_build_base_rejects_q_not_above_r():
    with pytest.raises(ValueError):
        build_base(2.0, 1.0, make_params(1, [1], [2], 2, 2))


def test_base_sample_has_correct_moments():
    base = BaseDensity(1, 5.0)
    x = base.sample(200_000, np.random.default_rng(0))[:, 0]
    # uniform on [-6, -1] plus an independent centred bump
    assert x.mean() == pytest.approx(-3.5, abs=0.02)
    assert x.max() <= 0 and x.min() >= -7


# ---------------------------------------------------------------------------
# the family f_w


def test_zero_weights_give_base_density():
    fam = small_family()
    rule = family_rule(fam)
    assert np.array_equal(eval_density(fam, np.zeros(fam.M), rule[0]), fam.base(rule[0]))


def test_points_in_a_bump_box_see_only_that_bump():
    fam = small_family(M=3)
    w = np.array([0.2, 0.7, 1.0])
    x = fam.centers([1]) + 0.1
    only = np.zeros(3)
    only[1] = w[1]
    assert eval_density(fam, w, x) == pytest.approx(
        eval_density(fam, only, x) - fam.A * fam.m_vol * (w[0] + w[2]) * fam.base(x))
    assert fam.locate(x)[0] == 1


def test_locate_outside_boxes():
    fam = small_family(d=2, M=4)
    x = np.array([[-1.0, -1.0], [3.0, 3.0], [2.0, 2.0]])
    assert fam.locate(x).tolist() == [-1, -1, 0]


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=5, max_size=5))
def test_family_integrates_to_one(w):
    fam = small_family(M=5)
    rule = family_rule(fam)
    assert apply_rule(rule, eval_density(fam, np.array(w), rule[0])) == pytest.approx(1, abs=1e-8)


@pytest.mark.parametrize("p", [1.0, 2.0, 2.5, 4.0])
def test_lp_decomposition_all_ones(p):
    fam = small_family(M=4)
    F = Functional("LpNorm", p)
    w = np.ones(fam.M)
    am = fam.A * fam.m_vol
    expected = ((1 - am * fam.M) ** p * fam.base.norm_power(p)
                + fam.A ** p * fam.m_vol * fam.M * fam.profile.norm_power(p))
    assert integral_H(fam, w, F) == pytest.approx(expected, rel=1e-13)


def test_lp_decomposition_zero_weights():
    fam = small_family()
    F = Functional("LpNorm", 2.5)
    assert functional_value(fam, np.zeros(fam.M), F) == pytest.approx(fam.base.norm(2.5),
                                                                       rel=1e-13)


@pytest.mark.parametrize("kind,p", [("LpNorm", 2.5), ("IntegralPower", 3.0), ("Entropy", None),
                                    ("Tsallis", 0.5), ("Renyi", 2.0)])
def test_decomposition_matches_quadrature(kind, p):
    fam = small_family(M=4)
    F = Functional(kind, p)
    rule = family_rule(fam)
    w = np.random.default_rng(5).uniform(size=fam.M)
    vals = F.H(eval_density(fam, w, rule[0]))
    assert integral_H(fam, w, F) == pytest.approx(apply_rule(rule, vals), rel=1e-8, abs=1e-10)


def test_functional_guards():
    with pytest.raises(ValueError):
        Functional("LpNorm", 0.5)
    with pytest.raises(ValueError):
        Functional("Tsallis", 1.0)
    with pytest.raises(ValueError):
        Functional("Cosine", 2.0)


def test_weights_outside_unit_cube_rejected():
    fam = small_family()
    with pytest.raises(ValueError):
        eval_density(fam, np.full(fam.M, 1.5), np.zeros((1, 1)))


# ---------------------------------------------------------------------------
# sampling


def test_sample_zero_weights_stays_on_negative_orthant():
    fam = small_family()
    x = sample(fam, np.zeros(fam.M), 5000, np.random.default_rng(1))
    assert np.all(x <= 0)


def test_sample_empty():
    fam = small_family()
    assert sample(fam, np.ones(fam.M), 0, np.random.default_rng(1)).shape == (0, 1)


def test_bump_hit_frequencies():
    fam = small_family(M=4, load=0.8)
    w = np.array([1.0, 0.25, 0.5, 0.0])
    n = 100_000
    x = sample(fam, w, n, np.random.default_rng(2))
    hits = np.bincount(fam.locate(x) + 1, minlength=fam.M + 1)[1:] / n
    am = fam.A * fam.m_vol
    for m in range(fam.M):
        assert abs(hits[m] - am * w[m]) <= 3 * math.sqrt(am / n) + 1e-12


def test_sample_reproducible():
    fam = small_family(d=2)
    w = np.full(fam.M, 0.5)
    a = sample(fam, w, 1000, np.random.default_rng(9))
    b = sample(fam, w, 1000, np.random.default_rng(9))
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# parameter selection


def lb_pair():
    return PairSpec("prop1", 2, 2).build()


def test_selection_for_lower_bound_configuration():
    res = select_parameters(SelectionInputs(P_LB, 1000, 2, lb_pair()))
    assert res.feasible
    assert res.M >= res.d_lower
    assert all(c["ok"] for c in res.checks.values())
    for ident in res.identities.values():
        assert ident["rel_error"] <= 1e-12


def test_selection_reports_infeasible_when_n_small():
    res = select_parameters(SelectionInputs(P_LB, 10, 2, lb_pair()))
    assert not res.feasible and res.J is None
    assert "moment_gap" in res.violated[0]


def test_check_assumptions_flags_positivity_violation():
    pair = lb_pair()
    sigma = (0.5,)
    M = 10
    A = 0.6 / (sigma[0] * M)
    out = check_assumptions_raw(P_LB, pair, 1000, 2, Constants(), A, sigma, sigma[0], M)
    assert not out["positivity"]["ok"]
    assert out["positivity"]["lhs"] == pytest.approx(0.6)


def test_check_assumptions_on_selected_family():
    res = select_parameters(SelectionInputs(P_LB, 1000, 2, lb_pair()))
    out = check_assumptions(res.family, lb_pair(), 1000, 2, P_LB)
    assert all(c["ok"] for c in out.values())
