import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpnorm_minimax.family import (BaseDensity, BumpProfile, DensityFamily, Functional,
                                   SelectionInputs, sample, select_parameters)
from lpnorm_minimax.fuzzy import (IntervalJ, LBConfig, PairSpec, binomial_tail_bound,
                                  c_star, counts, delta, gamma_m, interval_gap, interval_J,
                                  log_binomial_tail_bound, log_upsilon, run_lb_experiment,
                                  upsilon)
from lpnorm_minimax.measures import identical_pair, point_mass, uniform
from lpnorm_minimax.rates import make_params

from oracles import exact_binomial_tail, log_fraction, to_mp_any

P_LB = make_params(1, [1], [1], 2, 2)


def small_family(d=1, M=6):
    return DensityFamily(BumpProfile(d), BaseDensity(d, 3.0), (0.5,) * d,
                         0.4 / (0.5 ** d * M), M)


# ---------------------------------------------------------------------------
# counts


def test_counts_empty_sample():
    fam = small_family()
    cv = counts(fam, np.empty((0, 1)))
    assert cv.n0 == 0 and all(c == 0 for c in cv.per_bump)


def test_counts_all_in_base():
    fam = small_family()
    x = np.full((17, 1), -2.5)
    assert counts(fam, x).n0 == 17


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2000), st.integers(0, 2**32 - 1))
def test_counts_partition_sample(n, seed):
    fam = small_family(d=2, M=5)
    x = sample(fam, np.ones(fam.M), n, np.random.default_rng(seed))
    cv = counts(fam, x)
    assert cv.n0 + sum(cv.per_bump) == n == cv.n


# ---------------------------------------------------------------------------
# likelihood factors


@pytest.mark.parametrize("k", [0, 1, 3, 6])
def test_gamma_without_exponential_is_moment(k):
    pr = PairSpec("prop1", 3, 2).build()
    assert gamma_m(pr.mu, k, 0, 0.0) == pytest.approx(float(pr.mu.moment_mp(k)), rel=1e-14)
    assert gamma_m(pr.mu, k, 10, 0.0) == pytest.approx(float(pr.mu.moment_mp(k)), rel=1e-14)


def test_gamma_point_mass():
    assert gamma_m(point_mass(), 0, 3, 0.5) == pytest.approx(math.exp(-1.5), rel=1e-15)


def test_gamma_uniform_closed_form():
    assert gamma_m(uniform(), 1, 1, 1.0) == pytest.approx(1 - 2 * math.exp(-1), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 8), st.floats(0.0, 40.0))
def test_gamma_matches_quadrature(k, c):
    pr = PairSpec("prop1", 2, 2).build()
    m = pr.nu
    with mp.workdps(40):
        total = mp.fsum(to_mp_any(w) * to_mp_any(a) ** k * mp.exp(-c * to_mp_any(a))
                        for a, w in m.atoms)
        for pc in m.pieces:
            lo, hi = to_mp_any(pc.lo), to_mp_any(pc.hi)
            total += mp.quad(lambda y: pc.value_mp(y) * y ** k * mp.exp(-c * y), [lo, hi])
    assert gamma_m(m, k, 1, c) == pytest.approx(float(total), rel=1e-12)


def test_gamma_rejects_negative_D():
    with pytest.raises(ValueError):
        gamma_m(uniform(), 1, 1, -1.0)


# ---------------------------------------------------------------------------
# likelihood ratio


def test_upsilon_identical_pair_is_one():
    fam = small_family()
    pr = identical_pair(uniform())
    x = sample(fam, np.ones(fam.M), 300, np.random.default_rng(0))
    assert upsilon(pr, fam, x) == 1.0


def test_upsilon_near_one_without_bump_hits():
    # every sample point in the base, matched moments up to order 2r = 4, small D n0
    pr = PairSpec("prop1", 5, 5).build()
    fam = DensityFamily(BumpProfile(1), BaseDensity(1, 3.0), (0.5,), 1e-6, 10)
    x = np.full((50, 1), -2.0)
    assert upsilon(pr, fam, x) == pytest.approx(1.0, abs=1e-6)


def test_log_upsilon_permutation_invariant():
    pr = PairSpec("prop1", 2, 2).build()
    fam = small_family()
    rng = np.random.default_rng(4)
    x = sample(fam, np.ones(fam.M), 500, rng)
    a = log_upsilon(pr, fam, counts(fam, x))
    b = log_upsilon(pr, fam, counts(fam, x[rng.permutation(500)]))
    assert a == b


def test_log_upsilon_matches_direct_product():
    pr = PairSpec("prop1", 2, 2).build()
    fam = small_family()
    x = sample(fam, np.ones(fam.M), 400, np.random.default_rng(8))
    cv = counts(fam, x)
    e1 = float(pr.mu.moment_mp(1))
    D = fam.D(e1)
    direct = math.fsum(math.log(gamma_m(pr.mu, k, cv.n0, D)) - math.log(gamma_m(pr.nu, k, cv.n0, D))
                       for k in cv.per_bump)
    assert log_upsilon(pr, fam, cv) == pytest.approx(direct, rel=1e-10, abs=1e-13)


# ---------------------------------------------------------------------------
# functional intervals and their separation


def test_interval_gap_identical_and_disjoint():
    a = IntervalJ(0.0, 1.0, 0.5, 0.5)
    assert interval_gap(a, a) == 0.0
    assert interval_gap(a, IntervalJ(2.0, 3.0, 2.5, 0.5)) == 1.0
    assert interval_gap(IntervalJ(2.0, 3.0, 2.5, 0.5), a) == 1.0


def test_interval_endpoints_monotone_G():
    res = select_parameters(SelectionInputs(P_LB, 1000, 2, PairSpec("prop1", 2, 2).build()))
    F = Functional("LpNorm", 2.0)
    J = interval_J(PairSpec("prop1", 2, 2).build().mu, res.family, F, 128.0)
    assert J.lo == pytest.approx(math.sqrt(J.center - J.alpha), rel=1e-15)
    assert J.hi == pytest.approx(math.sqrt(J.center + J.alpha), rel=1e-15)


def test_delta_zero_for_identical_pair():
    res = select_parameters(SelectionInputs(P_LB, 1000, 2, PairSpec("prop1", 2, 2).build()))
    pr = identical_pair(PairSpec("prop1", 2, 2).build().nu)
    assert delta(pr, res.family, Functional("LpNorm", 2.0), 128.0) == 0.0


# ---------------------------------------------------------------------------
# binomial tail bound


def test_binomial_bound_at_n():
    n, prob = 12, 0.2
    assert binomial_tail_bound(n, prob, n) >= prob ** n
    assert binomial_tail_bound(n, prob, n) == pytest.approx(prob ** n * math.exp(n * (1 - prob)))


def test_binomial_bound_example():
    b = binomial_tail_bound(10, 0.1, 5)
    assert b == pytest.approx(0.2 ** 5 * math.exp(4), rel=1e-14)
    assert float(exact_binomial_tail(10, Fraction(1, 10), 5)) <= b


def test_binomial_bound_equals_one_at_mean():
    assert binomial_tail_bound(40, 0.25, 10) == pytest.approx(1.0, abs=1e-15)


def test_binomial_bound_rejects_z_below_mean():
    with pytest.raises(ValueError):
        log_binomial_tail_bound(10, 0.5, 3)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 120), st.integers(1, 99), st.data())
def test_binomial_bound_dominates_exact_tail(n, pct, data):
    prob = Fraction(pct, 100)
    z_min = math.ceil(prob * n)
    z = data.draw(st.integers(z_min, n))
    exact = exact_binomial_tail(n, prob, z)
    assert log_binomial_tail_bound(n, float(prob), z) >= log_fraction(exact) - 1e-12


def test_c_star_value_and_void_flag():
    assert c_star(128.0) == pytest.approx(0.02778, abs=5e-5)
    assert math.isnan(c_star(4.0))


# ---------------------------------------------------------------------------
# Monte Carlo driver


def test_lb_degenerate_pair_always_half():
    cfg = LBConfig(P_LB, 1000, 2, PairSpec("identical", 2, 2), reps=10, seed=1)
    rep = run_lb_experiment(cfg)
    assert rep.p_upsilon_half == 1.0


def test_lb_reproducible_and_threads_agree():
    cfg = LBConfig(P_LB, 1000, 2, PairSpec("prop1", 2, 2), reps=30, seed=7)
    a = run_lb_experiment(cfg)
    b = run_lb_experiment(LBConfig(P_LB, 1000, 2, PairSpec("prop1", 2, 2), reps=30, seed=7,
                                   threads=2))
    assert a.rows == b.rows
    assert a.as_dict() == b.as_dict()


def test_lb_infeasible_configuration_reports():
    rep = run_lb_experiment(LBConfig(P_LB, 10, 2, PairSpec("prop1", 2, 2), reps=5))
    assert not rep.feasible and rep.notes
