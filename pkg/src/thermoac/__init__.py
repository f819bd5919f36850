"""Desk-scale simulator for a singular phase-field system coupled to a
pointwise temperature equation with branch selection.

The public surface re-exports the pieces a script needs: model parameters and
branch geometry, grids and fields, the two half-maps (field evolution and
temperature solve), initial-data synthesis/validation, and the windowed
continuation driver.
"""

__version__ = "0.1.0"

from .allen_cahn import EvolutionInput, EvolutionResult, discrete_energy, evolve_fields, pde_substep
from .config import (
    RunConfig,
    canonical_config_text,
    canonical_run_config,
    config_hash,
    load_run_config,
)
from .driver import DriverConfig, RunResult, WindowStats, continue_in_time, run_window
from .errors import (
    BracketFailure,
    MarginViolation,
    NewtonDivergence,
    NoContraction,
    RangeViolation,
    ShrinkSignal,
    ThermoacError,
    WindowUnderflow,
)
from .grid import Grid, ScalarField, constant_field, field_from_function, laplacian_neumann, norms
from .initial_data import (
    InitialTriple,
    ValidationReport,
    default_rho0_profile,
    synthesize,
    validate,
)
from .model import BranchGeometry, ModelParams, Potential, dlam_ds, f_prime, lam, log_double_well
from .state import SystemState, Trajectory
from .temperature import MarginReport, margin_check, pointwise_margin, solve_theta, theta_rate_bound
from .xi_ode import XiOdeInput, XiSolution, dt_sqrt_xi, maximal_solution

__all__ = [
    "__version__",
    "BranchGeometry", "ModelParams", "Potential", "lam", "dlam_ds", "f_prime", "log_double_well",
    "Grid", "ScalarField", "field_from_function", "constant_field", "laplacian_neumann", "norms",
    "XiOdeInput", "XiSolution", "maximal_solution", "dt_sqrt_xi",
    "EvolutionInput", "EvolutionResult", "evolve_fields", "pde_substep", "discrete_energy",
    "MarginReport", "pointwise_margin", "margin_check", "solve_theta", "theta_rate_bound",
    "InitialTriple", "ValidationReport", "default_rho0_profile", "synthesize", "validate",
    "SystemState", "Trajectory",
    "DriverConfig", "WindowStats", "RunResult", "run_window", "continue_in_time",
    "RunConfig", "load_run_config", "canonical_run_config", "canonical_config_text", "config_hash",
    "ThermoacError", "NewtonDivergence", "RangeViolation", "NoContraction",
    "MarginViolation", "BracketFailure", "WindowUnderflow", "ShrinkSignal",
]
