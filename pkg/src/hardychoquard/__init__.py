"""Ground states, sharp constants and radial dynamics for NLS with a critical
Hardy potential and a Choquard nonlinearity."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ModelParams,
    RadialField,
    RadialGrid,
    Regime,
    energy,
    field_from_physical,
    gamma_prime,
    hardy_seminorm_sq,
    make_grid,
    make_params,
    mass,
    weighted_moment,
)
from .riesz import RieszOperator, apply_riesz, build_riesz, choquard_energy  # noqa: E402
from .groundstate import (  # noqa: E402
    GroundStateResult,
    NonConvergence,
    compute_ground_state,
    existence_classifier,
    minimize_weinstein,
    pohozaev_check,
    rescale_to_ground_state,
    threshold_quantities,
)
from .dynamics import SimControls, Trajectory, Verdict, classify, simulate, step  # noqa: E402
from .analytic import PseudoconformalSolution, evaluate_pseudoconformal  # noqa: E402

__all__ = [
    "ModelParams", "RadialField", "RadialGrid", "Regime", "energy", "field_from_physical", "gamma_prime",
    "hardy_seminorm_sq", "make_grid", "make_params", "mass", "weighted_moment",
    "RieszOperator", "apply_riesz", "build_riesz", "choquard_energy",
    "GroundStateResult", "NonConvergence", "compute_ground_state", "existence_classifier", "minimize_weinstein",
    "pohozaev_check", "rescale_to_ground_state", "threshold_quantities",
    "SimControls", "Trajectory", "Verdict", "classify", "simulate", "step",
    "PseudoconformalSolution", "evaluate_pseudoconformal",
]
