"""Tests for the closed-form and Monte-Carlo oracles.

These are the reference implementations everything else is checked against,
so they get the most paranoid treatment: worked values frozen to many digits,
cross-checks between independent derivations, and validation of the sampling
protocol guarantees (determinism, prefix monotonicity).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmlab import (
    AlgorithmSpec,
    Constants,
    Dataset,
    bilinear_exact_delta,
    estimate_constants,
    finite_difference_grad,
    make_gaussian_dataset,
    make_objective,
    parse_schedule,
    ppm_step,
    ppm_step_direct_solve,
    quadratic_saddle,
    sppm_convergence_check,
)


# ---------------------------------------------------------------------------
# quadratic_saddle


def test_quadratic_saddle_scsc_worked_example():
    obj = make_objective("scsc_quadratic", d=1, mu=0.1)
    data = Dataset(np.array([[1.0]]))
    sp = quadratic_saddle(obj, data)
    assert sp.w_star == pytest.approx(-0.0990099, abs=1e-7)
    assert sp.theta_star == pytest.approx(0.990099, abs=1e-6)


def test_quadratic_saddle_scsc_is_stationary():
    obj = make_objective("scsc_quadratic", d=4, mu=0.3)
    data = make_gaussian_dataset(n=12, d=4, seed=3)
    sp = quadratic_saddle(obj, data)
    gw = obj.grad_w(sp.w_star, sp.theta_star, data.mean)
    gt = obj.grad_theta(sp.w_star, sp.theta_star, data.mean)
    assert np.linalg.norm(gw) < 1e-12
    assert np.linalg.norm(gt) < 1e-12
    assert sp.value == pytest.approx(obj.value(sp.w_star, sp.theta_star, data.mean))


def test_quadratic_saddle_scsc_closed_form():
    # w* = -mu z / (1 + mu^2), theta* = z / (1 + mu^2)
    obj = make_objective("scsc_quadratic", d=3, mu=0.5)
    data = make_gaussian_dataset(n=7, d=3, seed=11)
    sp = quadratic_saddle(obj, data)
    zbar = data.mean
    np.testing.assert_allclose(sp.w_star, -0.5 * zbar / 1.25, rtol=1e-14)
    np.testing.assert_allclose(sp.theta_star, zbar / 1.25, rtol=1e-14)


def test_quadratic_saddle_bilinear_interior():
    obj = make_objective("bilinear", d=2, rho_w=5.0, rho_theta=5.0)
    data = Dataset(np.array([[0.3, -0.4], [0.5, 0.2]]))
    sp = quadratic_saddle(obj, data)
    np.testing.assert_allclose(sp.w_star, np.zeros(2))
    np.testing.assert_allclose(sp.theta_star, data.mean)
    assert sp.value == pytest.approx(0.0)


def test_quadratic_saddle_bilinear_projects_large_mean():
    obj = make_objective("bilinear", d=1, rho_w=1.0, rho_theta=1.0)
    data = Dataset(np.array([[3.0]]))
    sp = quadratic_saddle(obj, data)
    assert sp.theta_star == pytest.approx(1.0)


def test_quadratic_saddle_rejects_nonconvex():
    obj = make_objective("toy_ncsc", d=2, mu=0.5, rho_w=1.0, rho_theta=1.0)
    data = make_gaussian_dataset(n=4, d=2, seed=0)
    with pytest.raises(ValueError):
        quadratic_saddle(obj, data)


# ---------------------------------------------------------------------------
# bilinear_exact_delta


def test_bilinear_exact_delta_worked_values():
    assert bilinear_exact_delta(0.1, 10, 1, np.array([1.0])) == pytest.approx(
        0.0100499, abs=1e-7
    )
    assert bilinear_exact_delta(0.1, 10, 2, np.array([1.0])) == pytest.approx(
        0.0101, abs=1e-9
    )


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(1e-3, 0.5),
    n=st.integers(1, 200),
    T=st.integers(1, 120),
    scale=st.floats(0.1, 5.0),
)
def test_bilinear_exact_delta_matches_closed_form(alpha, n, T, scale):
    dz = np.array([scale, -scale])
    got = bilinear_exact_delta(alpha, n, T, dz)
    expect = (alpha / n) * (1.0 + alpha * alpha) ** (T / 2.0) * np.linalg.norm(dz)
    assert got == pytest.approx(expect, rel=1e-12)


def test_bilinear_exact_delta_validation():
    with pytest.raises(ValueError):
        bilinear_exact_delta(0.1, 10, 0, np.array([1.0]))
    with pytest.raises(ValueError):
        bilinear_exact_delta(0.1, 0, 5, np.array([1.0]))
    with pytest.raises(ValueError):
        bilinear_exact_delta(-0.1, 10, 5, np.array([1.0]))


# ---------------------------------------------------------------------------
# finite differences


def test_finite_difference_exact_for_bilinear():
    obj = make_objective("bilinear", d=3)
    rng = np.random.default_rng(5)
    w, theta, z = rng.standard_normal((3, 3))
    gw, gt = finite_difference_grad(obj, w, theta, z)
    np.testing.assert_allclose(gw, obj.grad_w(w, theta, z), atol=1e-9)
    np.testing.assert_allclose(gt, obj.grad_theta(w, theta, z), atol=1e-9)


def test_finite_difference_h_validation():
    obj = make_objective("bilinear", d=1)
    with pytest.raises(ValueError):
        finite_difference_grad(obj, np.zeros(1), np.zeros(1), np.zeros(1), h=0.0)


# ---------------------------------------------------------------------------
# estimate_constants


def test_estimate_constants_bilinear_worked_range():
    # Unit balls for w/theta and unit-ball z: ||grad_w|| = ||z - theta|| has
    # supremum 2; at 1e5 samples the estimate must have nearly found it.
    obj = make_objective("bilinear", d=2, rho_w=1.0, rho_theta=1.0)

    def unit_ball_z(rng):
        pt = rng.standard_normal(2)
        pt /= np.linalg.norm(pt)
        return pt * rng.uniform(0, 1) ** 0.5

    est = estimate_constants(obj, rho_w=1.0, rho_theta=1.0, z_sampler=unit_ball_z,
                             num_samples=100_000, seed=0)
    assert est.L_w <= 2.0 + 1e-12
    assert est.L_w >= 1.9
    assert est.L >= est.L_w


def test_estimate_constants_scsc_ell_is_exact():
    # The ScScQuadratic gradient field is linear with isotropic Jacobian, so
    # every pair of points measures exactly sqrt(1 + mu^2).
    mu = 0.7
    obj = make_objective("scsc_quadratic", d=3, mu=mu)
    est = estimate_constants(obj, rho_w=2.0, rho_theta=2.0, num_samples=500, seed=1)
    assert est.ell == pytest.approx(math.hypot(1.0, mu), rel=1e-12)
    assert est.mu == mu


def test_estimate_constants_prefix_monotone():
    obj = make_objective("toy_ncsc", d=2, mu=0.5, rho_w=1.0, rho_theta=1.0)
    prev = None
    for k in (100, 500, 2000):
        est = estimate_constants(obj, rho_w=1.0, rho_theta=1.0, num_samples=k, seed=9)
        if prev is not None:
            assert est.L >= prev.L
            assert est.L_w >= prev.L_w
            assert est.ell >= prev.ell
        prev = est


def test_estimate_constants_deterministic():
    obj = make_objective("bilinear", d=2, rho_w=1.0, rho_theta=1.0)
    a = estimate_constants(obj, rho_w=1.0, rho_theta=1.0, num_samples=300, seed=4)
    b = estimate_constants(obj, rho_w=1.0, rho_theta=1.0, num_samples=300, seed=4)
    assert (a.L, a.L_w, a.ell) == (b.L, b.L_w, b.ell)


def test_estimate_constants_requires_finite_region():
    obj = make_objective("bilinear", d=2)
    with pytest.raises(ValueError):
        estimate_constants(obj, rho_w=None, rho_theta=1.0)


# ---------------------------------------------------------------------------
# ppm direct solve


@pytest.mark.parametrize("kind,mu", [("bilinear", None), ("scsc_quadratic", 0.35)])
def test_ppm_direct_solve_matches_closed_form(kind, mu):
    obj = make_objective(kind, d=4, mu=mu)
    rng = np.random.default_rng(21)
    for _ in range(25):
        w, theta, z = rng.standard_normal((3, 4))
        eta = float(rng.uniform(0.01, 2.0))
        w1, t1 = ppm_step(obj, w, theta, z, eta)
        w2, t2 = ppm_step_direct_solve(obj, w, theta, z, eta)
        assert np.linalg.norm(w1 - w2) <= 1e-10
        assert np.linalg.norm(t1 - t2) <= 1e-10


def test_ppm_direct_solve_applies_projection():
    obj = make_objective("bilinear", d=2, rho_w=0.1, rho_theta=0.1)
    w, theta, z = np.array([5.0, 0.0]), np.array([0.0, 5.0]), np.zeros(2)
    w2, t2 = ppm_step_direct_solve(obj, w, theta, z, 0.5)
    assert np.linalg.norm(w2) <= 0.1 + 1e-12
    assert np.linalg.norm(t2) <= 0.1 + 1e-12


# ---------------------------------------------------------------------------
# sppm_convergence_check


def test_sppm_convergence_check_full_batch():
    obj = make_objective("scsc_quadratic", d=3, mu=0.5, rho_w=2.0, rho_theta=2.0)
    data = make_gaussian_dataset(n=20, d=3, seed=8)
    rep = sppm_convergence_check(obj, data, eta=0.05, T=200, mode="full_batch")
    gap, bound = rep
    assert gap >= -1e-12
    assert bound == pytest.approx(rep.D**2 / (2 * 0.05 * 200))
    assert gap <= bound
    assert rep.se == 0.0


def test_sppm_convergence_check_stochastic_reports_se():
    obj = make_objective("scsc_quadratic", d=2, mu=0.5, rho_w=2.0, rho_theta=2.0)
    data = make_gaussian_dataset(n=10, d=2, seed=2)
    rep = sppm_convergence_check(obj, data, eta=0.01, T=50, mode="stochastic",
                                 num_seeds=20)
    assert rep.num_seeds == 20
    assert rep.se > 0.0
    assert np.isfinite(rep.gap)


def test_sppm_convergence_check_rejects_other_kinds():
    obj = make_objective("bilinear", d=2, rho_w=1.0, rho_theta=1.0)
    data = make_gaussian_dataset(n=5, d=2, seed=0)
    with pytest.raises(ValueError):
        sppm_convergence_check(obj, data, eta=0.1, T=10)


def test_sppm_convergence_check_rejects_bad_mode():
    obj = make_objective("scsc_quadratic", d=2, mu=0.5, rho_w=1.0, rho_theta=1.0)
    data = make_gaussian_dataset(n=5, d=2, seed=0)
    with pytest.raises(ValueError):
        sppm_convergence_check(obj, data, eta=0.1, T=10, mode="bogus")
