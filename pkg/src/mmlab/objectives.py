"""Minimax objectives, feasible sets, datasets, and risk functionals.

Everything in this package studies stochastic saddle problems

    min_{w in W} max_{theta in Theta}  E_z[ f(w, theta; z) ]

on analytically tractable objective families.  W and Theta are centered
Euclidean balls (radius ``None`` = unconstrained).  All three families are
linear in the sample z, so dataset-averaged gradients and inner maximizers
coincide with the single-sample formulas evaluated at the dataset mean; the
optimizer loops rely on that identity throughout.
"""

from __future__ import annotations

import dataclasses
from typing import Protocol, TypeAlias, runtime_checkable

import numpy as np
from numpy.typing import NDArray

Vector: TypeAlias = NDArray[np.float64]

__all__ = [
    "Vector",
    "project_ball",
    "Dataset",
    "make_gaussian_dataset",
    "save_dataset_csv",
    "load_dataset_csv",
    "Objective",
    "Bilinear",
    "ScScQuadratic",
    "SineSaddle",
    "OBJECTIVE_KINDS",
    "make_objective",
    "worst_case_empirical_risk",
    "worst_case_population_risk",
    "generalization_risk_closed_form",
]


def project_ball(x: Vector, radius: float | None) -> Vector:
    """Euclidean projection of ``x`` onto the centered ball of ``radius``.

    ``radius=None`` means unconstrained: ``x`` is returned unchanged.  Inside
    the ball the input array itself is returned (no copy); callers treat
    iterates as immutable.
    """
    if radius is None:
        return x
    if radius <= 0:
        raise ValueError("radius must be positive")
    nrm = float(np.linalg.norm(x))
    if nrm <= radius:
        return x
    return (radius / nrm) * x


def _as_vector(x, d: int, name: str) -> Vector:
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (d,):
        raise ValueError(f"{name} must have shape ({d},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return v


@dataclasses.dataclass(frozen=True)
class Dataset:
    """An ordered collection of n sample vectors of dimension d.

    The sample mean is computed once at construction; it is the only dataset
    statistic the full-batch algorithms need.
    """

    samples: Vector
    mean: Vector = dataclasses.field(init=False, repr=False)

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2:
            raise ValueError("samples must be a 2-D array of shape (n, d)")
        if samples.shape[0] < 1:
            raise ValueError("dataset must contain at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "mean", samples.mean(axis=0))

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]

    def with_sample(self, i: int, z_new) -> "Dataset":
        """A new dataset equal to this one except sample ``i`` is ``z_new``."""
        if not 0 <= i < self.n:
            raise ValueError(f"sample index {i} out of range [0, {self.n})")
        z = _as_vector(z_new, self.d, "z_new")
        samples = self.samples.copy()
        samples[i] = z
        return Dataset(samples)


def make_gaussian_dataset(n: int, d: int, seed=0, mean=None) -> Dataset:
    """Draw n i.i.d. samples from N(mean, I_d).

    ``mean`` may be None (zero mean), a scalar, or a length-d vector.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = np.random.default_rng(seed)
    samples = rng.standard_normal((n, d))
    if mean is not None:
        samples = samples + np.broadcast_to(np.asarray(mean, dtype=np.float64), (d,))
    return Dataset(samples)


def save_dataset_csv(data: Dataset, path) -> None:
    """Write samples as headerless CSV with 17 significant digits (lossless)."""
    np.savetxt(path, data.samples, fmt="%.17g", delimiter=",")


def load_dataset_csv(path) -> Dataset:
    samples = np.loadtxt(path, delimiter=",", ndmin=2)
    return Dataset(samples)


@runtime_checkable
class Objective(Protocol):
    """The interface every saddle objective implements.

    ``convexity`` is one of "cc" (convex-concave), "scsc" (strongly-convex
    strongly-concave), "nc" (nonconvex strongly-concave); it selects which
    expansivity/stability results apply.
    """

    d: int
    rho_w: float | None
    rho_theta: float | None
    kind: str
    convexity: str
    mu: float | None

    def value(self, w: Vector, theta: Vector, z: Vector) -> float: ...

    def grad_w(self, w: Vector, theta: Vector, z: Vector) -> Vector: ...

    def grad_theta(self, w: Vector, theta: Vector, z: Vector) -> Vector: ...

    def inner_max(self, w: Vector, z_bar: Vector) -> Vector: ...

    def f_max(self, w: Vector, z_bar: Vector) -> float: ...


def _check_radius(radius, name: str) -> None:
    if radius is not None and radius <= 0:
        raise ValueError(f"{name} must be positive or None")


@dataclasses.dataclass(frozen=True)
class Bilinear:
    """f(w, theta; z) = w . (z - theta).

    Convex-concave (neither player is strongly curved).  grad_w = z - theta,
    grad_theta = -w.  The inner maximum over an unbounded theta is infinite,
    so ``inner_max``/``f_max`` require a finite ``rho_theta``:
    theta*(w) = -rho_theta * w/|w|  and  f_max(w) = w.z_bar + rho_theta|w|.
    """

    d: int
    rho_w: float | None = None
    rho_theta: float | None = None

    kind = "bilinear"
    convexity = "cc"
    mu = None

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("d must be >= 1")
        _check_radius(self.rho_w, "rho_w")
        _check_radius(self.rho_theta, "rho_theta")

    def value(self, w, theta, z) -> float:
        return float(w @ (z - theta))

    def grad_w(self, w, theta, z) -> Vector:
        return z - theta

    def grad_theta(self, w, theta, z) -> Vector:
        return -w

    def inner_max(self, w, z_bar) -> Vector:
        if self.rho_theta is None:
            raise ValueError("inner_max of a bilinear objective needs a finite rho_theta")
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            return np.zeros(self.d)
        return (-self.rho_theta / nrm) * w

    def f_max(self, w, z_bar) -> float:
        return self.value(w, self.inner_max(w, z_bar), z_bar)


@dataclasses.dataclass(frozen=True)
class ScScQuadratic:
    """f(w, theta; z) = w . (z - theta) + (mu/2)(|w|^2 - |theta|^2).

    mu-strongly-convex in w and mu-strongly-concave in theta.
    grad_w = z - theta + mu*w, grad_theta = -w - mu*theta.  The unconstrained
    inner maximizer is theta*(w) = -w/mu; with a theta-ball it is the radial
    clip of that point (the maximizer of an isotropic concave quadratic over
    a centered ball lies on the ray of the unconstrained optimum).
    """

    d: int
    mu: float
    rho_w: float | None = None
    rho_theta: float | None = None

    kind = "scsc_quadratic"
    convexity = "scsc"

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        _check_radius(self.rho_w, "rho_w")
        _check_radius(self.rho_theta, "rho_theta")

    def value(self, w, theta, z) -> float:
        quad = 0.5 * self.mu * (float(w @ w) - float(theta @ theta))
        return float(w @ (z - theta)) + quad

    def grad_w(self, w, theta, z) -> Vector:
        return z - theta + self.mu * w

    def grad_theta(self, w, theta, z) -> Vector:
        return -w - self.mu * theta

    def inner_max(self, w, z_bar) -> Vector:
        return project_ball(-w / self.mu, self.rho_theta)

    def f_max(self, w, z_bar) -> float:
        return self.value(w, self.inner_max(w, z_bar), z_bar)


@dataclasses.dataclass(frozen=True)
class SineSaddle:
    """f(w, theta; z) = sin(w) . theta + theta . z - (mu/2)|theta|^2.

    Nonconvex in w (through the coordinate-wise sine) and mu-strongly-concave
    in theta.  grad_w = cos(w) * theta, grad_theta = sin(w) + z - mu*theta.
    Unconstrained inner maximizer: theta*(w) = (sin(w) + z)/mu, giving
    f_max(w) = |sin(w) + z|^2 / (2 mu).
    """

    d: int
    mu: float
    rho_w: float | None = None
    rho_theta: float | None = None

    kind = "toy_ncsc"
    convexity = "nc"

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        _check_radius(self.rho_w, "rho_w")
        _check_radius(self.rho_theta, "rho_theta")

    def value(self, w, theta, z) -> float:
        return float(np.sin(w) @ theta + theta @ z - 0.5 * self.mu * (theta @ theta))

    def grad_w(self, w, theta, z) -> Vector:
        return np.cos(w) * theta

    def grad_theta(self, w, theta, z) -> Vector:
        return np.sin(w) + z - self.mu * theta

    def inner_max(self, w, z_bar) -> Vector:
        return project_ball((np.sin(w) + z_bar) / self.mu, self.rho_theta)

    def f_max(self, w, z_bar) -> float:
        return self.value(w, self.inner_max(w, z_bar), z_bar)


OBJECTIVE_KINDS = ("bilinear", "scsc_quadratic", "toy_ncsc")


def make_objective(kind: str, d: int, mu: float | None = None,
                   rho_w: float | None = None, rho_theta: float | None = None) -> Objective:
    """Construct an objective from its config ``kind`` string."""
    if kind == "bilinear":
        if mu is not None:
            raise ValueError("bilinear objective takes no mu")
        return Bilinear(d=d, rho_w=rho_w, rho_theta=rho_theta)
    if kind == "scsc_quadratic":
        if mu is None:
            raise ValueError("scsc_quadratic objective requires mu")
        return ScScQuadratic(d=d, mu=mu, rho_w=rho_w, rho_theta=rho_theta)
    if kind == "toy_ncsc":
        if mu is None:
            raise ValueError("toy_ncsc objective requires mu")
        return SineSaddle(d=d, mu=mu, rho_w=rho_w, rho_theta=rho_theta)
    raise ValueError(f"unknown objective kind {kind!r}; expected one of {OBJECTIVE_KINDS}")


def worst_case_empirical_risk(obj: Objective, w: Vector, data: Dataset) -> float:
    """R_S(w) = max_theta (1/n) sum_i f(w, theta; z_i) = f_max(w, z_bar)."""
    return obj.f_max(w, data.mean)


def worst_case_population_risk(obj: Objective, w: Vector, population_mean) -> float:
    """R(w) = max_theta E_z f(w, theta; z) = f_max(w, E[z]).

    Exact because every objective here is linear in z.
    """
    pm = np.broadcast_to(np.asarray(population_mean, dtype=np.float64), (obj.d,))
    return obj.f_max(w, pm)


def generalization_risk_closed_form(obj: Objective, w: Vector, data: Dataset,
                                    population_mean) -> float:
    """eps_gen(w) = R(w) - R_S(w) = w . (E[z] - z_bar_S).

    The maximizing theta terms cancel between the two risks for the bilinear
    and quadratic families because their inner maximizer does not depend on
    z_bar.  The sine family has no such cancellation, so it is rejected.
    """
    if obj.kind not in ("bilinear", "scsc_quadratic"):
        raise ValueError(f"no closed-form generalization risk for kind {obj.kind!r}")
    pm = np.broadcast_to(np.asarray(population_mean, dtype=np.float64), (obj.d,))
    return float(w @ (pm - data.mean))
