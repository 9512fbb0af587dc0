"""Closed-form stability, generalization, and convergence bound calculators.

Every calculator consumes a :class:`Constants` bundle (Lipschitz constant L
of the joint gradient, L_w of the w-gradient, smoothness ell, and strong
convexity/concavity modulus mu where applicable) plus the problem size, and
returns either a plain number or a :class:`BoundReport` whose
``conditions_ok`` flag records whether the stepsize/parameter preconditions
of the corresponding result hold.  Out-of-range inputs still produce a value
whenever it is finite, so bound curves can be plotted across sweeps; the
flag is never silently assumed.

Bound names (thm2_*, thm3_*, thm4, thm5_*, thm6, remark1, lemma1_*,
lemma6, cor1) are this package's catalog labels, used consistently across
the library, the CLI, and the docs:

* lemma1  — per-step expansivity coefficients of the GDA/PPM update maps.
* thm2    — uniform-stability generalization bounds, strongly-convex
            strongly-concave regime, constant stepsizes.
* remark1 — convex-concave constant-stepsize GDA: exponential-in-T
            stability bound and the exact bilinear divergence that shows the
            exponential dependence is tight.
* thm3    — convex-concave proximal-point family, summable stepsizes.
* thm4    — average-iterate convergence ceiling D^2/(2 eta T) for PPM.
* cor1    — the T that balances thm3 stability against thm4 optimization,
            and the resulting excess-risk level.
* thm5    — nonconvex strongly-concave 1/t-stepsize bounds (SGDA vs SGDmax).
* thm6    — nonconvex-nonconcave 1/t-stepsize SGDA bound.
* lemma6  — smoothness constant of the maximized objective f_max.
"""

from __future__ import annotations

import dataclasses
import math

from .objectives import Objective

__all__ = [
    "Constants",
    "BoundReport",
    "ball_constants",
    "lemma1_coefficient",
    "thm2_bound",
    "remark1_bound",
    "remark1_exact_bilinear_delta",
    "thm3_bound",
    "thm4_bound",
    "cor1_schedule",
    "thm5_bounds",
    "thm6_bound",
    "lemma6_smoothness",
]


@dataclasses.dataclass(frozen=True)
class Constants:
    """Problem constants over the feasible region.

    L bounds the joint gradient norm |(grad_w, grad_theta)|, L_w the
    w-gradient norm alone (so L_w <= L), ell the joint-gradient smoothness,
    and mu the strong convexity/concavity modulus (None for merely
    convex-concave problems).
    """

    L: float
    L_w: float
    ell: float
    mu: float | None = None

    def __post_init__(self) -> None:
        if self.L <= 0 or self.L_w <= 0 or self.ell <= 0:
            raise ValueError("L, L_w, and ell must be positive")
        if self.L_w > self.L * (1 + 1e-12):
            raise ValueError("L_w cannot exceed L (the joint gradient includes the w block)")
        if self.mu is not None and self.mu <= 0:
            raise ValueError("mu must be positive (or None)")

    @property
    def kappa(self) -> float:
        """Condition number ell/mu."""
        return self.ell / self._require_mu()

    def _require_mu(self) -> float:
        if self.mu is None:
            raise ValueError("this bound requires a strong convexity modulus mu")
        return self.mu


@dataclasses.dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    conditions_ok: bool
    note: str = ""


def ball_constants(obj: Objective, z_norm_cap: float) -> Constants:
    """Closed-form suprema of L, L_w, ell over the objective's feasible balls
    with sample norms capped at ``z_norm_cap``.

    These are honest upper constants (unlike the Monte-Carlo estimates,
    which approach the suprema from below).  Requires finite radii.
    """
    if z_norm_cap <= 0:
        raise ValueError("z_norm_cap must be positive")
    if obj.rho_w is None or obj.rho_theta is None:
        raise ValueError("ball_constants needs finite rho_w and rho_theta")
    rw, rt = obj.rho_w, obj.rho_theta
    if obj.kind == "bilinear":
        l_w = z_norm_cap + rt
        l_t = rw
        ell = 1.0
    elif obj.kind == "scsc_quadratic":
        l_w = z_norm_cap + rt + obj.mu * rw
        l_t = rw + obj.mu * rt
        ell = math.sqrt(1.0 + obj.mu * obj.mu)
    elif obj.kind == "toy_ncsc":
        l_w = rt
        l_t = math.sqrt(obj.d) + z_norm_cap + obj.mu * rt
        # Per-coordinate curvature block [[-sin(w)theta, cos(w)], [cos(w), -mu]]:
        # largest singular value is at most ((rt+mu) + sqrt((rt+mu)^2+4))/2.
        ell = 0.5 * ((rt + obj.mu) + math.sqrt((rt + obj.mu) ** 2 + 4.0))
    else:
        raise ValueError(f"unknown objective kind {obj.kind!r}")
    return Constants(L=math.hypot(l_w, l_t), L_w=l_w, ell=ell, mu=obj.mu)


_LEMMA1_SETTINGS = ("nc", "cc", "scsc")


def lemma1_coefficient(setting: str, algorithm: str, constants: Constants, *,
                       alpha_w: float | None = None, alpha_theta: float | None = None,
                       eta: float | None = None) -> BoundReport:
    """Per-step expansivity coefficient of the update map.

    setting: "nc" (nonconvex strongly-concave), "cc" (convex-concave), or
    "scsc"; algorithm: "gda" or "ppm".  The six coefficients:

        nc-gda:   1 + ell * max(alpha_w, alpha_theta)
        nc-ppm:   1/(1 - ell*eta)          (requires eta < 1/ell)
        cc-gda:   sqrt(1 + alpha^2 ell^2)  (equal stepsizes)
        cc-ppm:   1
        scsc-gda: 1 - alpha*mu + alpha^2 ell^2 / 2   (requires alpha <= 2mu/ell^2)
        scsc-ppm: 1/(1 + mu*eta)
    """
    if setting not in _LEMMA1_SETTINGS:
        raise ValueError(f"unknown setting {setting!r}; expected one of {_LEMMA1_SETTINGS}")
    if algorithm not in ("gda", "ppm"):
        raise ValueError(f"lemma1 covers 'gda' and 'ppm', not {algorithm!r}")
    ell = constants.ell
    name = f"lemma1_{setting}_{algorithm}"

    if algorithm == "ppm":
        if eta is None or eta <= 0:
            raise ValueError("ppm coefficients need eta > 0")
        if setting == "nc":
            ok = eta < 1.0 / ell
            value = 1.0 / (1.0 - ell * eta) if ok else math.inf
            return BoundReport(name, value, ok)
        if setting == "cc":
            return BoundReport(name, 1.0, True)
        mu = constants._require_mu()
        return BoundReport(name, 1.0 / (1.0 + mu * eta), True)

    if setting == "nc":
        if alpha_w is None or alpha_theta is None:
            raise ValueError("nc-gda coefficient needs alpha_w and alpha_theta")
        if alpha_w <= 0 or alpha_theta <= 0:
            raise ValueError("stepsizes must be positive")
        return BoundReport(name, 1.0 + ell * max(alpha_w, alpha_theta), True)
    if alpha_w is None or alpha_w <= 0:
        raise ValueError(f"{setting}-gda coefficient needs alpha_w > 0")
    if alpha_theta is not None and alpha_theta != alpha_w:
        raise ValueError(f"{setting}-gda coefficient assumes equal stepsizes")
    if setting == "cc":
        return BoundReport(name, math.sqrt(1.0 + alpha_w * alpha_w * ell * ell), True)
    mu = constants._require_mu()
    ok = alpha_w <= 2.0 * mu / (ell * ell)
    return BoundReport(name, 1.0 - alpha_w * mu + 0.5 * alpha_w * alpha_w * ell * ell, ok)


_THM2_ALGORITHMS = ("gda", "gdmax", "ppm", "ppmax")


def thm2_bound(algorithm: str, constants: Constants, n: int, *,
               alpha_w: float | None = None) -> BoundReport:
    """Uniform-stability generalization bound, strongly-convex
    strongly-concave regime with constant stepsizes.

        gda:          2 L L_w / ((mu - alpha_w ell^2/2) n)
        gdmax, ppmax: 2 L_w^2 / (mu n)
        ppm:          2 L L_w / (mu n)

    The gda flag requires alpha_w <= mu/ell^2 (the bound's stated stepsize
    range; a conservative condition — the value itself stays finite up to
    2mu/ell^2 and is reported as +inf beyond that).
    """
    if algorithm not in _THM2_ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {_THM2_ALGORITHMS}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if algorithm != "gda" and alpha_w is not None:
        raise ValueError("alpha_w only applies to the gda bound")
    mu = constants._require_mu()
    name = f"thm2_{algorithm}"
    if algorithm == "gda":
        if alpha_w is None or alpha_w <= 0:
            raise ValueError("thm2 gda bound needs alpha_w > 0")
        denom = mu - 0.5 * alpha_w * constants.ell ** 2
        value = 2.0 * constants.L * constants.L_w / (denom * n) if denom > 0 else math.inf
        return BoundReport(name, value, alpha_w <= mu / constants.ell ** 2)
    if algorithm == "ppm":
        return BoundReport(name, 2.0 * constants.L * constants.L_w / (mu * n), True)
    return BoundReport(name, 2.0 * constants.L_w ** 2 / (mu * n), True)


def remark1_bound(alpha: float, constants: Constants, n: int, T: int) -> float:
    """Convex-concave constant-stepsize GDA stability bound after T steps:
    the summed geometric growth series

        (2 alpha L / n) * (q^(T+1) - 1)/(q - 1) * L_w,   q = sqrt(1+alpha^2 ell^2).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if T < 1:
        raise ValueError("T must be >= 1")
    q = math.sqrt(1.0 + alpha * alpha * constants.ell ** 2)
    series = (q ** (T + 1) - 1.0) / (q - 1.0)
    return (2.0 * alpha * constants.L / n) * series * constants.L_w


def remark1_exact_bilinear_delta(alpha: float, n: int, T: int, dz_norm: float) -> float:
    """Exact coupled-iterate divergence of unprojected full-batch GDA on the
    bilinear objective: (alpha/n) (1+alpha^2)^(T/2) ||dz||.

    T counts steps after initialization (T >= 1); the replaced sample enters
    as a one-time gradient impulse inside the first step.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if T < 1:
        raise ValueError("T must be >= 1")
    if dz_norm < 0:
        raise ValueError("dz_norm must be non-negative")
    return (alpha / n) * (1.0 + alpha * alpha) ** (T / 2.0) * dz_norm


def thm3_bound(constants: Constants, n: int, eta_schedule, T: int,
               algorithm: str = "ppm") -> BoundReport:
    """Convex-concave proximal-family stability bound with summable steps:

        ppm:   (2 L L_w / n) * sum_{t=1..T} eta_t
        ppmax: (2 L_w^2 / n) * sum_{t=1..T} eta_t
    """
    if algorithm not in ("ppm", "ppmax"):
        raise ValueError(f"thm3 covers 'ppm' and 'ppmax', not {algorithm!r}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if T < 1:
        raise ValueError("T must be >= 1")
    total = math.fsum(eta_schedule.at(t) for t in range(1, T + 1))
    scale = constants.L * constants.L_w if algorithm == "ppm" else constants.L_w ** 2
    return BoundReport(f"thm3_{algorithm}", 2.0 * scale * total / n, True)


def thm4_bound(D: float, eta: float, T: int) -> float:
    """Average-iterate optimality-gap ceiling for constant-stepsize PPM:
    D^2/(2 eta T), D the initial distance to the saddle."""
    if D < 0:
        raise ValueError("D must be non-negative")
    if eta <= 0:
        raise ValueError("eta must be positive")
    if T < 1:
        raise ValueError("T must be >= 1")
    return D * D / (2.0 * eta * T)


def cor1_schedule(n: int, D: float, eta: float, constants: Constants) -> tuple[float, float]:
    """Iteration budget balancing stability against optimization for PPM.

    Returns (T_ppm, excess_bound):

        T_ppm  = sqrt(n D^2 / (2 eta^2 L L_w))
        excess = sqrt(2 D^2 L L_w / n)

    At T_ppm the two halves agree: D^2/(2 eta T_ppm) = excess/2 and
    (2 L L_w / n) eta T_ppm = excess/2.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if D <= 0:
        raise ValueError("D must be positive")
    if eta <= 0:
        raise ValueError("eta must be positive")
    ll = constants.L * constants.L_w
    t_ppm = math.sqrt(n * D * D / (2.0 * eta * eta * ll))
    excess = math.sqrt(2.0 * D * D * ll / n)
    return t_ppm, excess


def thm5_bounds(constants: Constants, n: int, T: int, c: float, r: float) -> tuple[BoundReport, BoundReport]:
    """Nonconvex strongly-concave generalization bounds with 1/t stepsizes.

    SGDA runs alpha_{w,t}=c/t, alpha_{theta,t}=c r^2/t; SGDmax runs
    alpha_{w,t}=c/t with an exact inner maximizer.  With x=(r+1) c ell and
    y=(kappa+2) ell c:

        sgda:   (1 + 1/x)/n * (12 (r+1) c L L_w)^(1/(x+1)) * T^(x/(x+1))
        sgdmax: (1 + 2/y)/n * (2 c L_w^2)^(2/(y+2)) * T^(y/(y+2))

    The sgda flag checks 1 <= r <= kappa (the stated ratio range).  Both
    assume 0 <= f_max <= 1, which is not checkable here.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if T < 1:
        raise ValueError("T must be >= 1")
    if c <= 0:
        raise ValueError("c must be positive")
    if r < 1:
        raise ValueError("r must be >= 1")
    ell = constants.ell
    kappa = constants.kappa

    x = (r + 1.0) * c * ell
    sgda_value = ((1.0 + 1.0 / x) / n
                  * (12.0 * (r + 1.0) * c * constants.L * constants.L_w) ** (1.0 / (x + 1.0))
                  * T ** (x / (x + 1.0)))
    sgda = BoundReport("thm5_sgda", sgda_value, r <= kappa)

    y = (kappa + 2.0) * ell * c
    sgdmax_value = ((1.0 + 2.0 / y) / n
                    * (2.0 * c * constants.L_w ** 2) ** (2.0 / (y + 2.0))
                    * T ** (y / (y + 2.0)))
    sgdmax = BoundReport("thm5_sgdmax", sgdmax_value, True)
    return sgda, sgdmax


def thm6_bound(constants: Constants, n: int, T: int, c: float) -> BoundReport:
    """Nonconvex-nonconcave SGDA bound with max stepsize c/t.  With x=ell*c:

        (1 + 1/x)/n * (2 c L L_w)^(1/(x+1)) * T^(x/(x+1))
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if T < 1:
        raise ValueError("T must be >= 1")
    if c <= 0:
        raise ValueError("c must be positive")
    x = constants.ell * c
    value = ((1.0 + 1.0 / x) / n
             * (2.0 * c * constants.L * constants.L_w) ** (1.0 / (x + 1.0))
             * T ** (x / (x + 1.0)))
    return BoundReport("thm6_sgda", value, True)


def lemma6_smoothness(constants: Constants) -> float:
    """Smoothness constant of the maximized objective f_max:
    ell + ell^2/(2 mu)."""
    mu = constants._require_mu()
    return constants.ell + constants.ell ** 2 / (2.0 * mu)
