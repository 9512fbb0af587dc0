"""mmlab: algorithmic stability and generalization for minimax optimization.

A small laboratory for studying how gradient-descent-ascent style algorithms
(GDA, GDmax, proximal point, and their max-oracle variants) generalize on
stochastic saddle-point problems.  The package bundles:

* benchmark objectives (bilinear, strongly-convex-strongly-concave quadratic,
  and a nonconvex sine saddle) over Euclidean-ball feasible sets,
* single-step updates and full trajectory runners, both full-batch and
  stochastic,
* a catalog of stability and convergence bounds with checkable conditions,
* paired-run machinery for measuring argument stability and generalization
  risk directly, plus Monte-Carlo estimators for the regularity constants,
* closed-form oracles used to cross-check all of the above,
* CSV/SVG reporting and the ``mmlab`` command-line interface.
"""

from .bounds import (
    BoundReport,
    Constants,
    ball_constants,
    cor1_schedule,
    lemma1_coefficient,
    lemma6_smoothness,
    remark1_bound,
    remark1_exact_bilinear_delta,
    thm2_bound,
    thm3_bound,
    thm4_bound,
    thm5_bounds,
    thm6_bound,
)
from .objectives import (
    OBJECTIVE_KINDS,
    Bilinear,
    Dataset,
    Objective,
    ScScQuadratic,
    SineSaddle,
    Vector,
    generalization_risk_closed_form,
    load_dataset_csv,
    make_gaussian_dataset,
    make_objective,
    project_ball,
    save_dataset_csv,
    worst_case_empirical_risk,
    worst_case_population_risk,
)
from .optimizers import (
    ALGORITHM_NAMES,
    AlgorithmSpec,
    Schedule,
    Trajectory,
    average_iterates,
    gda_step,
    gdmax_step,
    parse_schedule,
    ppm_residual,
    ppm_step,
    ppmax_step,
    run,
    step_once,
)
from .oracles import (
    ConvergenceReport,
    SaddlePoint,
    bilinear_exact_delta,
    estimate_constants,
    finite_difference_grad,
    ppm_step_direct_solve,
    quadratic_saddle,
    sppm_convergence_check,
)
from .stability import (
    GenRiskCurve,
    StabilityTrace,
    UniformStabilityEstimate,
    estimate_expansivity,
    estimate_uniform_stability,
    gen_risk_curve,
    make_neighbor_dataset,
    paired_run,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # objectives
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
    # optimizers
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
    # bounds
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
    # oracles
    "SaddlePoint",
    "quadratic_saddle",
    "bilinear_exact_delta",
    "finite_difference_grad",
    "estimate_constants",
    "ppm_step_direct_solve",
    "ConvergenceReport",
    "sppm_convergence_check",
    # stability
    "StabilityTrace",
    "GenRiskCurve",
    "make_neighbor_dataset",
    "paired_run",
    "gen_risk_curve",
    "estimate_expansivity",
    "UniformStabilityEstimate",
    "estimate_uniform_stability",
]
