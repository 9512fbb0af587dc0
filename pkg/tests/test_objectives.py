import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mmlab import (
    OBJECTIVE_KINDS,
    Bilinear,
    Dataset,
    Objective,
    ScScQuadratic,
    SineSaddle,
    finite_difference_grad,
    generalization_risk_closed_form,
    load_dataset_csv,
    make_gaussian_dataset,
    make_objective,
    project_ball,
    save_dataset_csv,
    worst_case_empirical_risk,
    worst_case_population_risk,
)

finite_vec = arrays(np.float64, 3, elements=st.floats(-50, 50))


# ---------------------------------------------------------------------------
# projection


def test_project_ball_identity_when_unconstrained():
    x = np.array([10.0, -3.0])
    assert project_ball(x, None) is x


def test_project_ball_inside_and_boundary():
    x = np.array([0.3, 0.4])
    np.testing.assert_array_equal(project_ball(x, 1.0), x)
    y = project_ball(np.array([3.0, 4.0]), 1.0)
    np.testing.assert_allclose(y, [0.6, 0.8])
    assert np.linalg.norm(y) == pytest.approx(1.0)


def test_project_ball_rejects_bad_radius():
    with pytest.raises(ValueError):
        project_ball(np.ones(2), 0.0)
    with pytest.raises(ValueError):
        project_ball(np.ones(2), -1.0)


@settings(max_examples=100, deadline=None)
@given(x=finite_vec, y=finite_vec, radius=st.floats(0.1, 10.0))
def test_project_ball_nonexpansive(x, y, radius):
    dist = np.linalg.norm(project_ball(x, radius) - project_ball(y, radius))
    assert dist <= np.linalg.norm(x - y) + 1e-9


# ---------------------------------------------------------------------------
# datasets


def test_dataset_basic_properties():
    data = Dataset(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert data.n == 2
    assert data.d == 2
    np.testing.assert_allclose(data.mean, [2.0, 3.0])


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.array([1.0, 2.0]))  # not 2-D
    with pytest.raises(ValueError):
        Dataset(np.array([[np.nan, 0.0]]))
    with pytest.raises(ValueError):
        Dataset(np.zeros((0, 3)))


def test_dataset_with_sample():
    data = Dataset(np.array([[1.0], [2.0], [3.0]]))
    other = data.with_sample(1, np.array([9.0]))
    assert other.samples[1, 0] == 9.0
    assert data.samples[1, 0] == 2.0  # original untouched
    np.testing.assert_array_equal(other.samples[[0, 2]], data.samples[[0, 2]])
    with pytest.raises(ValueError):
        data.with_sample(3, np.array([0.0]))
    with pytest.raises(ValueError):
        data.with_sample(0, np.array([0.0, 0.0]))


def test_make_gaussian_dataset_deterministic_and_shifted():
    a = make_gaussian_dataset(n=50, d=4, seed=7)
    b = make_gaussian_dataset(n=50, d=4, seed=7)
    np.testing.assert_array_equal(a.samples, b.samples)
    c = make_gaussian_dataset(n=50, d=4, seed=7, mean=2.0)
    np.testing.assert_allclose(c.samples, a.samples + 2.0)
    v = make_gaussian_dataset(n=50, d=4, seed=7, mean=[1.0, 0.0, -1.0, 2.0])
    np.testing.assert_allclose(v.samples, a.samples + np.array([1.0, 0.0, -1.0, 2.0]))


def test_dataset_csv_roundtrip(tmp_path):
    data = make_gaussian_dataset(n=9, d=3, seed=13)
    path = tmp_path / "data.csv"
    save_dataset_csv(data, path)
    back = load_dataset_csv(path)
    np.testing.assert_array_equal(back.samples, data.samples)


def test_load_dataset_csv_single_row(tmp_path):
    path = tmp_path / "one.csv"
    save_dataset_csv(Dataset(np.array([[1.5, -2.5]])), path)
    back = load_dataset_csv(path)
    assert back.samples.shape == (1, 2)


# ---------------------------------------------------------------------------
# objective values and gradients


def test_bilinear_value():
    obj = Bilinear(d=2)
    w = np.array([1.0, 2.0])
    theta = np.array([0.5, -0.5])
    z = np.array([1.0, 1.0])
    assert obj.value(w, theta, z) == pytest.approx(w @ (z - theta))


def test_scsc_value():
    obj = ScScQuadratic(d=2, mu=0.2)
    w = np.array([1.0, 0.0])
    theta = np.array([0.0, 2.0])
    z = np.array([1.0, -1.0])
    expect = w @ (z - theta) + 0.1 * (w @ w - theta @ theta)
    assert obj.value(w, theta, z) == pytest.approx(expect)


def test_sine_saddle_value():
    obj = SineSaddle(d=2, mu=0.5, rho_w=1.0, rho_theta=1.0)
    w = np.array([0.2, -0.3])
    theta = np.array([0.1, 0.4])
    z = np.array([1.0, 2.0])
    expect = np.sin(w) @ theta + theta @ z - 0.25 * theta @ theta
    assert obj.value(w, theta, z) == pytest.approx(expect)


@pytest.mark.parametrize(
    "kind,mu", [("bilinear", None), ("scsc_quadratic", 0.4), ("toy_ncsc", 0.4)]
)
def test_gradients_match_finite_differences(kind, mu):
    obj = make_objective(kind, d=3, mu=mu)
    rng = np.random.default_rng(17)
    for _ in range(20):
        w, theta, z = rng.standard_normal((3, 3))
        fw, ft = finite_difference_grad(obj, w, theta, z)
        np.testing.assert_allclose(obj.grad_w(w, theta, z), fw, atol=1e-7)
        np.testing.assert_allclose(obj.grad_theta(w, theta, z), ft, atol=1e-7)


def test_objective_protocol():
    assert isinstance(Bilinear(d=1), Objective)
    assert isinstance(ScScQuadratic(d=1, mu=1.0), Objective)
    assert isinstance(SineSaddle(d=1, mu=1.0), Objective)


# ---------------------------------------------------------------------------
# inner_max / f_max


def test_bilinear_inner_max():
    obj = Bilinear(d=2, rho_theta=3.0)
    w = np.array([3.0, 4.0])
    theta = obj.inner_max(w, np.zeros(2))
    np.testing.assert_allclose(theta, -3.0 * w / 5.0)
    np.testing.assert_array_equal(obj.inner_max(np.zeros(2), np.zeros(2)), np.zeros(2))


def test_bilinear_inner_max_needs_bounded_theta():
    obj = Bilinear(d=2)
    with pytest.raises(ValueError):
        obj.inner_max(np.ones(2), np.zeros(2))


def test_scsc_inner_max_interior_and_clipped():
    obj = ScScQuadratic(d=1, mu=0.5, rho_theta=1.0)
    np.testing.assert_allclose(obj.inner_max(np.array([-0.25]), np.zeros(1)), [0.5])
    np.testing.assert_allclose(obj.inner_max(np.array([-5.0]), np.zeros(1)), [1.0])


@pytest.mark.parametrize(
    "kind,mu",
    [("bilinear", None), ("scsc_quadratic", 0.3), ("toy_ncsc", 0.3)],
)
def test_inner_max_is_argmax(kind, mu):
    """No random feasible theta may beat the closed-form maximizer."""
    obj = make_objective(kind, d=3, mu=mu, rho_w=2.0, rho_theta=2.0)
    rng = np.random.default_rng(23)
    for _ in range(50):
        w = rng.standard_normal(3)
        w *= min(1.0, 2.0 / np.linalg.norm(w))
        zbar = rng.standard_normal(3)
        star = obj.inner_max(w, zbar)
        assert np.linalg.norm(star) <= 2.0 + 1e-12
        best = obj.value(w, star, zbar)
        for _ in range(20):
            cand = rng.standard_normal(3)
            cand *= min(1.0, 2.0 / np.linalg.norm(cand))
            assert obj.value(w, cand, zbar) <= best + 1e-10


@pytest.mark.parametrize(
    "kind,mu",
    [("bilinear", None), ("scsc_quadratic", 0.3), ("toy_ncsc", 0.3)],
)
def test_f_max_consistent_with_inner_max(kind, mu):
    obj = make_objective(kind, d=2, mu=mu, rho_w=1.0, rho_theta=1.0)
    rng = np.random.default_rng(3)
    for _ in range(10):
        w = rng.uniform(-0.5, 0.5, size=2)
        zbar = rng.standard_normal(2)
        assert obj.f_max(w, zbar) == pytest.approx(
            obj.value(w, obj.inner_max(w, zbar), zbar)
        )


# ---------------------------------------------------------------------------
# factory


def test_make_objective_kinds():
    assert set(OBJECTIVE_KINDS) == {"bilinear", "scsc_quadratic", "toy_ncsc"}
    assert isinstance(make_objective("bilinear", d=2), Bilinear)
    assert isinstance(make_objective("scsc_quadratic", d=2, mu=0.1), ScScQuadratic)
    assert isinstance(make_objective("toy_ncsc", d=2, mu=0.1), SineSaddle)


def test_make_objective_validation():
    with pytest.raises(ValueError):
        make_objective("bogus", d=2)
    with pytest.raises(ValueError):
        make_objective("bilinear", d=2, mu=0.5)  # bilinear has no mu
    with pytest.raises(ValueError):
        make_objective("scsc_quadratic", d=2)  # needs mu
    with pytest.raises(ValueError):
        make_objective("scsc_quadratic", d=2, mu=-0.1)
    with pytest.raises(ValueError):
        make_objective("bilinear", d=0)


# ---------------------------------------------------------------------------
# risks


def test_worst_case_risks_and_gen_risk_identity():
    obj = make_objective("scsc_quadratic", d=3, mu=0.2, rho_w=2.0, rho_theta=2.0)
    data = make_gaussian_dataset(n=25, d=3, seed=5)
    rng = np.random.default_rng(1)
    pop_mean = np.array([0.1, -0.2, 0.3])
    for _ in range(10):
        w = rng.uniform(-1, 1, size=3)
        emp = worst_case_empirical_risk(obj, w, data)
        pop = worst_case_population_risk(obj, w, pop_mean)
        gen = generalization_risk_closed_form(obj, w, data, pop_mean)
        assert emp == pytest.approx(obj.f_max(w, data.mean))
        # theta* is independent of the z argument for this family, so the
        # risk difference telescopes to the closed form exactly
        assert pop - emp == pytest.approx(gen, abs=1e-12)
        assert gen == pytest.approx(w @ (pop_mean - data.mean))


def test_population_risk_broadcasts_scalar_mean():
    obj = make_objective("bilinear", d=2, rho_theta=1.0)
    w = np.array([1.0, 1.0])
    assert worst_case_population_risk(obj, w, 0.0) == pytest.approx(
        obj.f_max(w, np.zeros(2))
    )


def test_gen_risk_closed_form_rejects_nonconvex():
    obj = make_objective("toy_ncsc", d=2, mu=0.5, rho_w=1.0, rho_theta=1.0)
    data = make_gaussian_dataset(n=5, d=2, seed=0)
    with pytest.raises(ValueError):
        generalization_risk_closed_form(obj, np.zeros(2), data, 0.0)
