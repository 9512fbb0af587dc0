"""Independent reference computations used to cross-check everything else.

These deliberately avoid the code paths they verify: the saddle comes from
the first-order conditions, the coupled-GDA divergence from powering the
2x2 rotation-plane recursion, gradients from central differences, constants
from Monte-Carlo suprema, and the proximal step from a dense linear solve.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import optimizers
from .bounds import Constants, thm4_bound
from .objectives import (
    Dataset,
    Objective,
    Vector,
    project_ball,
    worst_case_empirical_risk,
)

__all__ = [
    "SaddlePoint",
    "quadratic_saddle",
    "bilinear_exact_delta",
    "finite_difference_grad",
    "estimate_constants",
    "ppm_step_direct_solve",
    "ConvergenceReport",
    "sppm_convergence_check",
]


@dataclasses.dataclass(frozen=True)
class SaddlePoint:
    """(w*, theta*) of the dataset-averaged game plus the risk value there."""

    w_star: Vector
    theta_star: Vector
    value: float


def quadratic_saddle(obj: Objective, data: Dataset) -> SaddlePoint:
    """Saddle point of the averaged objective.

    ScScQuadratic: solving grad_w = z_bar - theta + mu w = 0 and
    grad_theta = -w - mu theta = 0 gives w* = -mu z_bar/(1+mu^2),
    theta* = z_bar/(1+mu^2) (interior; valid whenever the radii allow it).

    Bilinear: the ball-constrained game has the equilibrium w* = 0,
    theta* = project_ball(z_bar, rho_theta).  Note this is a genuine
    equilibrium only while ||z_bar|| <= rho_theta; outside that regime w = 0
    stops being a best response and the returned point is only the
    stationary candidate.
    """
    z_bar = data.mean
    if obj.kind == "scsc_quadratic":
        denom = 1.0 + obj.mu * obj.mu
        w_star = -obj.mu * z_bar / denom
        theta_star = z_bar / denom
    elif obj.kind == "bilinear":
        w_star = np.zeros(obj.d)
        theta_star = project_ball(z_bar, obj.rho_theta)
    else:
        raise ValueError(f"no saddle oracle for objective kind {obj.kind!r}")
    return SaddlePoint(w_star=w_star, theta_star=theta_star,
                       value=obj.value(w_star, theta_star, z_bar))


def bilinear_exact_delta(alpha: float, n: int, T: int, dz) -> float:
    """Coupled-iterate divergence of unprojected full-batch GDA on the
    bilinear objective after a single-sample replacement, via the exact
    recursion.

    The difference vector lives in a 2-plane where each iteration applies
    [[1, alpha], [-alpha, 1]]; the initial difference is the one-time
    gradient impulse of length (alpha/n)*||dz||.  Computed by explicitly
    powering the recursion (reference for the closed form
    (alpha/n)(1+alpha^2)^(T/2)||dz||).
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    dz_norm = float(np.linalg.norm(np.atleast_1d(np.asarray(dz, dtype=np.float64))))
    v = np.array([alpha * dz_norm / n, 0.0])
    m = np.array([[1.0, alpha], [-alpha, 1.0]])
    for _ in range(T):
        v = m @ v
    return float(np.linalg.norm(v))


def finite_difference_grad(obj: Objective, w: Vector, theta: Vector, z: Vector,
                           h: float = 1e-6) -> tuple[Vector, Vector]:
    """Central-difference gradients of f(., .; z) at (w, theta)."""
    if h <= 0:
        raise ValueError("h must be positive")
    d = len(w)
    grad_w = np.zeros(d)
    grad_theta = np.zeros(len(theta))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        grad_w[j] = (obj.value(w + e, theta, z) - obj.value(w - e, theta, z)) / (2 * h)
    for j in range(len(theta)):
        e = np.zeros(len(theta))
        e[j] = h
        grad_theta[j] = (obj.value(w, theta + e, z) - obj.value(w, theta - e, z)) / (2 * h)
    return grad_w, grad_theta


def _ball_point(rng: np.random.Generator, d: int, radius: float) -> Vector:
    """Uniform draw from the centered d-ball of the given radius."""
    x = rng.standard_normal(d)
    nrm = float(np.linalg.norm(x))
    if nrm == 0.0:
        return np.zeros(d)
    r = radius * rng.uniform() ** (1.0 / d)
    return (r / nrm) * x


def estimate_constants(obj: Objective, rho_w: float, rho_theta: float,
                       z_sampler=None, num_samples: int = 10_000, seed=0) -> Constants:
    """Monte-Carlo estimates of L, L_w, and ell over the given region.

    Points (w, theta) are sampled uniformly from the balls of radius rho_w /
    rho_theta and z from ``z_sampler(rng)`` (default: standard normal).
    L_w and L are running maxima of gradient norms; ell is the maximum joint
    gradient-difference ratio over consecutive disjoint sample pairs.  All
    randomness is drawn up front in a fixed order, so enlarging num_samples
    extends the same sample sequence and every estimate is monotone
    non-decreasing in num_samples.  These are lower estimates of the true
    suprema.
    """
    if rho_w is None or rho_theta is None or not (
        math.isfinite(rho_w) and math.isfinite(rho_theta)
    ):
        raise ValueError("estimate_constants needs finite sampling radii")
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(num_samples):
        w = _ball_point(rng, obj.d, rho_w)
        theta = _ball_point(rng, obj.d, rho_theta)
        z = z_sampler(rng) if z_sampler is not None else rng.standard_normal(obj.d)
        points.append((w, theta, np.asarray(z, dtype=np.float64)))

    l_w = 0.0
    l_joint = 0.0
    grads = []
    for w, theta, z in points:
        gw = obj.grad_w(w, theta, z)
        gt = obj.grad_theta(w, theta, z)
        l_w = max(l_w, float(np.linalg.norm(gw)))
        l_joint = max(l_joint, math.hypot(float(np.linalg.norm(gw)), float(np.linalg.norm(gt))))
        grads.append((gw, gt))

    ell = 0.0
    for k in range(num_samples // 2):
        wa, ta, za = points[2 * k]
        wb, tb, _ = points[2 * k + 1]
        # Smoothness pairs share the sample z (ell bounds the z-wise field).
        gwb = obj.grad_w(wb, tb, za)
        gtb = obj.grad_theta(wb, tb, za)
        gwa, gta = grads[2 * k]
        dist = math.hypot(float(np.linalg.norm(wa - wb)), float(np.linalg.norm(ta - tb)))
        if dist < 1e-12:
            continue
        diff = math.hypot(float(np.linalg.norm(gwa - gwb)), float(np.linalg.norm(gta - gtb)))
        ell = max(ell, diff / dist)

    return Constants(L=l_joint, L_w=l_w, ell=ell, mu=obj.mu)


def ppm_step_direct_solve(obj: Objective, w: Vector, theta: Vector, z: Vector,
                          eta: float) -> tuple[Vector, Vector]:
    """Reference proximal step for the linear-quadratic kinds via a dense
    (2d)x(2d) linear solve of the implicit optimality system."""
    if obj.kind not in ("bilinear", "scsc_quadratic"):
        raise ValueError("direct solve applies to the linear-quadratic kinds only")
    mu = obj.mu if obj.mu is not None else 0.0
    d = obj.d
    eye = np.eye(d)
    a = np.block([
        [(1.0 + eta * mu) * eye, -eta * eye],
        [eta * eye, (1.0 + eta * mu) * eye],
    ])
    rhs = np.concatenate([w - eta * z, theta])
    sol = np.linalg.solve(a, rhs)
    return project_ball(sol[:d], obj.rho_w), project_ball(sol[d:], obj.rho_theta)


@dataclasses.dataclass(frozen=True)
class ConvergenceReport:
    """Average-iterate optimality gap vs. its theoretical ceiling.

    Iterating yields (gap, bound) for tuple unpacking; ``se`` is the standard
    error of the gap across seeds (0.0 in full-batch mode).
    """

    gap: float
    bound: float
    se: float
    num_seeds: int
    D: float

    def __iter__(self):
        return iter((self.gap, self.bound))


def sppm_convergence_check(obj: Objective, data: Dataset, eta: float, T: int,
                           seed=0, mode: str = "full_batch", num_seeds: int = 100,
                           w0=None, theta0=None) -> ConvergenceReport:
    """Run (S)PPM on a quadratic saddle and compare the average-iterate gap
    to the D^2/(2 eta T) ceiling.

    gap = R_S(w_bar_T) - R_S(w*_S) with R_S the worst-case empirical risk and
    w*_S from the saddle oracle; D is the joint distance from the (fixed)
    initialization to the saddle.  Stochastic mode averages the gap over
    ``num_seeds`` index streams and reports the standard error.
    """
    if obj.kind != "scsc_quadratic":
        raise ValueError("convergence check is defined for scsc_quadratic objectives")
    if mode not in ("full_batch", "stochastic"):
        raise ValueError(f"unknown mode {mode!r}")
    saddle = quadratic_saddle(obj, data)
    w_init = np.zeros(obj.d) if w0 is None else np.asarray(w0, dtype=np.float64)
    theta_init = np.zeros(obj.d) if theta0 is None else np.asarray(theta0, dtype=np.float64)
    D = math.hypot(float(np.linalg.norm(w_init - saddle.w_star)),
                   float(np.linalg.norm(theta_init - saddle.theta_star)))
    risk_star = worst_case_empirical_risk(obj, saddle.w_star, data)

    def one_gap(spec: optimizers.AlgorithmSpec, s) -> float:
        traj = optimizers.run(spec, obj, data, T, w0=w0, theta0=theta0, seed=s,
                              record_stride=max(1, T))
        return worst_case_empirical_risk(obj, traj.avg_w, data) - risk_star

    schedule = optimizers.Schedule("constant", eta)
    if mode == "full_batch":
        spec = optimizers.AlgorithmSpec("ppm", schedule)
        gap = one_gap(spec, seed)
        se = 0.0
        used = 1
    else:
        spec = optimizers.AlgorithmSpec("ppm", schedule, stochastic=True)
        gaps = np.array([one_gap(spec, (seed, k)) for k in range(num_seeds)])
        gap = float(gaps.mean())
        se = float(gaps.std(ddof=1) / math.sqrt(num_seeds)) if num_seeds > 1 else 0.0
        used = num_seeds

    return ConvergenceReport(gap=gap, bound=thm4_bound(D, eta, T), se=se,
                             num_seeds=used, D=D)
