"""Tightest outer bound on the false-alarm / missed-detection region of
channel-based physical layer authentication, against an attacker that forges
the channel from correlated Gaussian side information."""

from .covmodel import (
    JointChannelCovariance,
    ScenarioSpec,
    ValidationReport,
    build_identity_scenario,
    sample_wishart_scenario,
    schur_A,
    schur_B,
    tol_psd,
    validate,
)
from .errors import (
    DomainError,
    NumericalDivergenceError,
    PlaboundError,
    SolverPreconditionError,
    StructuralError,
)
from .gaussian_info import (
    ErrorRegionBound,
    beta_lower_bound,
    binary_divergence,
    kl_gaussian,
    region_boundary,
)
from .solver import (
    AttackParameters,
    AttackSolution,
    AttackStrategy,
    assemble_joint,
    cost_J,
    divergence_D,
    extract_strategy,
    is_feasible,
    iterate_fixed_point,
    perturb_and_check,
    project_to_feasible,
    solve,
    solve_relaxed,
    stationarity_residual,
)

__version__ = "0.1.0"
