"""Minimax optimizer families: GDA, GDmax, PPM, and PPmax.

All four share the same driver (``run``): at iteration t = 1..T the update
consumes either the dataset mean (full batch) or one uniformly drawn sample
(stochastic; exactly one index draw per iteration from a generator seeded at
run start).  Iterates are kept inside the feasible balls by Euclidean
projection after every update.

The proximal steps solve the implicit system

    w' = w - eta * grad_w f(w', theta'; z)
    theta' = theta + eta * grad_theta f(w', theta'; z)

in closed form for the linear-quadratic objectives and by damped fixed-point
iteration for the sine objective; PPmax applies the analogous implicit step
to the maximized objective f_max and re-solves the inner maximum.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .objectives import Dataset, Objective, Vector, project_ball

__all__ = [
    "Schedule",
    "parse_schedule",
    "AlgorithmSpec",
    "ALGORITHM_NAMES",
    "gda_step",
    "gdmax_step",
    "ppm_step",
    "ppmax_step",
    "ppm_residual",
    "step_once",
    "Trajectory",
    "run",
    "average_iterates",
]

ALGORITHM_NAMES = ("gda", "gdmax", "ppm", "ppmax")

_SCHEDULE_KINDS = ("constant", "inverse_t")


@dataclasses.dataclass(frozen=True)
class Schedule:
    """Stepsize schedule: ``constant`` -> c, ``inverse_t`` -> c/t (t >= 1)."""

    kind: str
    c: float

    def __post_init__(self) -> None:
        if self.kind not in _SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; expected one of {_SCHEDULE_KINDS}")
        if not self.c > 0:
            raise ValueError("schedule constant must be positive")

    def at(self, t: int) -> float:
        """Stepsize at iteration t (1-indexed)."""
        if t < 1:
            raise ValueError("t must be >= 1")
        if self.kind == "constant":
            return self.c
        return self.c / t


def parse_schedule(text: str) -> Schedule:
    """Parse "constant:0.02" or "inverse_t:2.5"."""
    kind, sep, raw = text.partition(":")
    if not sep:
        raise ValueError(f"schedule {text!r} must look like 'kind:value'")
    try:
        c = float(raw)
    except ValueError:
        raise ValueError(f"schedule value {raw!r} is not a number") from None
    return Schedule(kind=kind, c=c)


@dataclasses.dataclass(frozen=True)
class AlgorithmSpec:
    """Which algorithm to run and with what stepsizes.

    ``step_theta`` applies to GDA only (defaults to ``step_w`` when omitted);
    for the max-oracle and proximal families the single ``step_w`` schedule
    is the stepsize (eta for the proximal pair).
    """

    name: str
    step_w: Schedule
    step_theta: Schedule | None = None
    stochastic: bool = False

    def __post_init__(self) -> None:
        if self.name not in ALGORITHM_NAMES:
            raise ValueError(f"unknown algorithm {self.name!r}; expected one of {ALGORITHM_NAMES}")
        if self.name != "gda" and self.step_theta is not None:
            raise ValueError(f"step_theta applies only to gda, not {self.name!r}")

    @property
    def theta_schedule(self) -> Schedule:
        return self.step_theta if self.step_theta is not None else self.step_w


def gda_step(obj: Objective, w: Vector, theta: Vector, z: Vector,
             alpha_w: float, alpha_theta: float) -> tuple[Vector, Vector]:
    """Simultaneous projected gradient descent-ascent step."""
    w_new = project_ball(w - alpha_w * obj.grad_w(w, theta, z), obj.rho_w)
    theta_new = project_ball(theta + alpha_theta * obj.grad_theta(w, theta, z), obj.rho_theta)
    return w_new, theta_new


def gdmax_step(obj: Objective, w: Vector, z: Vector, z_bar: Vector,
               alpha_w: float) -> tuple[Vector, Vector]:
    """Max-oracle descent step.

    theta* maximizes the dataset-averaged objective at the current w; the w
    gradient is then taken at (w, theta*) on ``z`` (the drawn sample, or the
    mean for full batch).  Returns the new w and the maximizer that was used.
    """
    theta_star = obj.inner_max(w, z_bar)
    w_new = project_ball(w - alpha_w * obj.grad_w(w, theta_star, z), obj.rho_w)
    return w_new, theta_star


def ppm_residual(obj: Objective, w: Vector, theta: Vector, z: Vector, eta: float,
                 w_new: Vector, theta_new: Vector) -> float:
    """Fixed-point residual of the implicit proximal system at (w_new, theta_new)."""
    rw = w_new - w + eta * obj.grad_w(w_new, theta_new, z)
    rt = theta_new - theta - eta * obj.grad_theta(w_new, theta_new, z)
    return float(np.linalg.norm(rw) + np.linalg.norm(rt))


def ppm_step(obj: Objective, w: Vector, theta: Vector, z: Vector, eta: float,
             *, tol: float = 1e-10, max_iter: int = 10_000,
             damping: float = 0.5) -> tuple[Vector, Vector]:
    """One proximal-point step on the saddle problem.

    Linear-quadratic kinds (bilinear, scsc_quadratic) admit a closed-form
    solution of the 2x2 per-coordinate-plane system; the sine kind uses a
    damped fixed-point iteration stopped at residual <= tol (RuntimeError if
    the cap is hit).  The unconstrained solution is projected onto the balls.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if obj.kind in ("bilinear", "scsc_quadratic"):
        mu = obj.mu if obj.mu is not None else 0.0
        # (1+eta*mu) w' - eta theta' = w - eta z ;  eta w' + (1+eta*mu) theta' = theta
        a = 1.0 + eta * mu
        b = eta
        p = w - eta * z
        q = theta
        det = a * a + b * b
        w_new = (a * p + b * q) / det
        theta_new = (-b * p + a * q) / det
    else:
        w_new = w.copy()
        theta_new = theta.copy()
        beta = damping
        for _ in range(max_iter):
            tw = w - eta * obj.grad_w(w_new, theta_new, z)
            tt = theta + eta * obj.grad_theta(w_new, theta_new, z)
            res = float(np.linalg.norm(w_new - tw) + np.linalg.norm(theta_new - tt))
            if res <= tol:
                break
            w_new = (1.0 - beta) * w_new + beta * tw
            theta_new = (1.0 - beta) * theta_new + beta * tt
        else:
            raise RuntimeError(f"ppm_step fixed point did not converge within {max_iter} iterations")
    return project_ball(w_new, obj.rho_w), project_ball(theta_new, obj.rho_theta)


def ppmax_step(obj: Objective, w: Vector, z: Vector, z_bar: Vector, eta: float,
               *, tol: float = 1e-10, max_iter: int = 10_000,
               damping: float = 0.5) -> tuple[Vector, Vector]:
    """One proximal step on f_max, then the inner maximizer at the new w.

    Solves w' = w - eta * grad f_max(w'; z) — equivalently the minimizer of
    eta*f_max(u; z) + |u - w|^2/2 — in closed form for the linear-quadratic
    kinds and by damped fixed point (via the Danskin gradient) for the sine
    kind.  Returns (projected w', inner_max(w', z_bar)).
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if obj.kind == "bilinear":
        if obj.rho_theta is None:
            raise ValueError("ppmax on a bilinear objective needs a finite rho_theta")
        # f_max(w; z) = w.z + rho|w|  ->  shrinkage of m = w - eta z.
        m = w - eta * z
        m_norm = float(np.linalg.norm(m))
        shrink = eta * obj.rho_theta
        if m_norm <= shrink:
            w_new = np.zeros(obj.d)
        else:
            w_new = (1.0 - shrink / m_norm) * m
    elif obj.kind == "scsc_quadratic":
        mu = obj.mu
        m = w - eta * z
        m_norm = float(np.linalg.norm(m))
        interior_scale = 1.0 + eta * (mu + 1.0 / mu)
        if obj.rho_theta is None or m_norm / interior_scale <= mu * obj.rho_theta:
            # theta* = -w'/mu stays inside the ball.
            w_new = m / interior_scale
        else:
            # theta* pinned to the boundary: f_max gains rho|w| instead of |w|^2/(2mu).
            s = (m_norm - eta * obj.rho_theta) / (1.0 + eta * mu)
            w_new = (s / m_norm) * m
    else:
        w_new = w.copy()
        beta = damping
        for _ in range(max_iter):
            grad = obj.grad_w(w_new, obj.inner_max(w_new, z), z)
            tw = w - eta * grad
            res = float(np.linalg.norm(w_new - tw))
            if res <= tol:
                break
            w_new = (1.0 - beta) * w_new + beta * tw
        else:
            raise RuntimeError(f"ppmax_step fixed point did not converge within {max_iter} iterations")
    w_new = project_ball(w_new, obj.rho_w)
    return w_new, obj.inner_max(w_new, z_bar)


def step_once(spec: AlgorithmSpec, obj: Objective, w: Vector, theta: Vector,
              z: Vector, z_bar: Vector, t: int) -> tuple[Vector, Vector]:
    """Apply iteration t (1-indexed, for the schedule) of the algorithm."""
    if spec.name == "gda":
        return gda_step(obj, w, theta, z, spec.step_w.at(t), spec.theta_schedule.at(t))
    if spec.name == "gdmax":
        return gdmax_step(obj, w, z, z_bar, spec.step_w.at(t))
    if spec.name == "ppm":
        return ppm_step(obj, w, theta, z, spec.step_w.at(t))
    return ppmax_step(obj, w, z, z_bar, spec.step_w.at(t))


@dataclasses.dataclass(frozen=True)
class Trajectory:
    """Recorded iterates of one run.

    ``ts`` holds the recorded iteration numbers (always including 0 and T);
    ``ws``/``thetas`` the matching iterates.  For the max-oracle algorithms
    the theta rows are the inner maximizers the steps used.  ``avg_w`` and
    ``avg_theta`` are exact running averages over *all* iterates t = 1..T
    regardless of the recording stride (the initialization is excluded; for
    T = 0 they equal the initialization).
    """

    ts: np.ndarray
    ws: np.ndarray
    thetas: np.ndarray
    avg_w: Vector
    avg_theta: Vector
    T: int
    seed: object
    algorithm: str
    stochastic: bool

    @property
    def final_w(self) -> Vector:
        return self.ws[-1]

    @property
    def final_theta(self) -> Vector:
        return self.thetas[-1]


def average_iterates(trajectory: Trajectory) -> tuple[Vector, Vector]:
    """The (w, theta) averages over iterates t = 1..T."""
    return trajectory.avg_w, trajectory.avg_theta


def _init_point(x0, d: int, radius, name: str) -> Vector:
    if x0 is None:
        return np.zeros(d)
    v = np.asarray(x0, dtype=np.float64)
    if v.shape != (d,):
        raise ValueError(f"{name} must have shape ({d},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return project_ball(v, radius)


def run(spec: AlgorithmSpec, obj: Objective, data: Dataset, T: int,
        w0=None, theta0=None, seed=0, record_stride: int = 1,
        indices: np.ndarray | None = None) -> Trajectory:
    """Run the algorithm for T iterations and record every stride-th iterate.

    ``indices`` (advanced) overrides the sampled index stream so coupled runs
    can share it; when omitted, a stochastic run draws its own stream from
    ``numpy.random.default_rng(seed)`` — exactly one uniform index per
    iteration.  Defaults start from w0 = theta0 = 0.
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    if data.d != obj.d:
        raise ValueError(f"dataset dimension {data.d} != objective dimension {obj.d}")

    w = _init_point(w0, obj.d, obj.rho_w, "w0")
    theta = _init_point(theta0, obj.d, obj.rho_theta, "theta0")

    if spec.stochastic:
        if indices is None:
            indices = np.random.default_rng(seed).integers(0, data.n, size=T)
        elif len(indices) < T:
            raise ValueError(f"indices has {len(indices)} entries, need {T}")

    z_bar = data.mean
    sum_w = np.zeros(obj.d)
    sum_theta = np.zeros(obj.d)
    ts = [0]
    ws = [w]
    thetas = [theta]

    for t in range(1, T + 1):
        z = data.samples[indices[t - 1]] if spec.stochastic else z_bar
        w, theta = step_once(spec, obj, w, theta, z, z_bar, t)
        sum_w += w
        sum_theta += theta
        if t % record_stride == 0 or t == T:
            ts.append(t)
            ws.append(w)
            thetas.append(theta)

    if T >= 1:
        avg_w = sum_w / T
        avg_theta = sum_theta / T
    else:
        avg_w = w.copy()
        avg_theta = theta.copy()

    return Trajectory(
        ts=np.asarray(ts, dtype=np.int64),
        ws=np.asarray(ws),
        thetas=np.asarray(thetas),
        avg_w=avg_w,
        avg_theta=avg_theta,
        T=T,
        seed=seed,
        algorithm=spec.name,
        stochastic=spec.stochastic,
    )
