"""Differentially private steady-state Kalman filtering.

Calibrate Gaussian privacy noise for shared output trajectories, solve the
steady-state filter any recipient of the privatized stream would run,
evaluate analytic bounds on that recipient's error and entropy, invert the
bounds to select privacy levels, and validate everything by seeded Monte
Carlo simulation.
"""

from .bounds import (
    APOSTERIORI_LOGDET,
    APOSTERIORI_TRACE,
    APRIORI_LOGDET,
    APRIORI_TRACE,
    BoundReport,
    ChannelExtremes,
    all_bounds,
    aposteriori_logdet_bounds,
    aposteriori_trace_bounds,
    apriori_logdet_bounds,
    apriori_trace_bounds,
    channel_extremes,
    differential_entropy,
)
from .calibration import (
    APOSTERIORI,
    APRIORI,
    CalibrationTarget,
    CalibrationVerification,
    EpsilonInterval,
    calibrate_aposteriori,
    calibrate_apriori,
    verify_calibration,
)
from .config import (
    Config,
    build_agents,
    build_privacy,
    config_to_dict,
    load_config,
    loads_config,
    resolve_sigma,
)
from .errors import (
    ConfigError,
    DegenerateSystemError,
    DimensionMismatchError,
    DPKalmanError,
    EmptyNetworkError,
    FactorizationError,
    InvalidTargetError,
    NoConvergenceError,
    NonPositiveSigmaError,
    NonSymmetricError,
    NotDetectableError,
    NotDiagonalError,
    NotPositiveDefiniteError,
    NumericalError,
    OutOfDomainError,
    SingularMatrixError,
    ValidationError,
)
from .filtering import FilterSolution, FilterState, predict, run_filter, solve_filter, update
from .linalg import (
    RiccatiSolution,
    SystemModel,
    block_diag,
    controllability_check,
    extreme_eigenvalues,
    observability_check,
    posterior_covariance,
    singular_values,
    solve_dare,
    symmetric_factor,
)
from .network import AgentSpec, NetworkModel, compose, per_agent_slices
from .privacy import (
    PrivacyConfig,
    gaussian_sigma,
    privatize,
    q_function,
    q_inverse,
    sensitivity_bound,
)
from .simulation import (
    SimulationConfig,
    SimulationRecord,
    SimulationResult,
    SimulationSummary,
    bound_violation_stats,
    simulate,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "APOSTERIORI",
    "APOSTERIORI_LOGDET",
    "APOSTERIORI_TRACE",
    "APRIORI",
    "APRIORI_LOGDET",
    "APRIORI_TRACE",
    "AgentSpec",
    "BoundReport",
    "CalibrationTarget",
    "CalibrationVerification",
    "ChannelExtremes",
    "Config",
    "ConfigError",
    "DPKalmanError",
    "DegenerateSystemError",
    "DimensionMismatchError",
    "EmptyNetworkError",
    "EpsilonInterval",
    "FactorizationError",
    "FilterSolution",
    "FilterState",
    "InvalidTargetError",
    "NetworkModel",
    "NoConvergenceError",
    "NonPositiveSigmaError",
    "NonSymmetricError",
    "NotDetectableError",
    "NotDiagonalError",
    "NotPositiveDefiniteError",
    "NumericalError",
    "OutOfDomainError",
    "PrivacyConfig",
    "RiccatiSolution",
    "SimulationConfig",
    "SimulationRecord",
    "SimulationResult",
    "SimulationSummary",
    "SingularMatrixError",
    "SystemModel",
    "ValidationError",
    "all_bounds",
    "aposteriori_logdet_bounds",
    "aposteriori_trace_bounds",
    "apriori_logdet_bounds",
    "apriori_trace_bounds",
    "block_diag",
    "bound_violation_stats",
    "build_agents",
    "build_privacy",
    "calibrate_aposteriori",
    "calibrate_apriori",
    "channel_extremes",
    "compose",
    "config_to_dict",
    "controllability_check",
    "differential_entropy",
    "extreme_eigenvalues",
    "gaussian_sigma",
    "load_config",
    "loads_config",
    "observability_check",
    "per_agent_slices",
    "posterior_covariance",
    "predict",
    "privatize",
    "q_function",
    "q_inverse",
    "resolve_sigma",
    "run_filter",
    "sensitivity_bound",
    "simulate",
    "singular_values",
    "solve_dare",
    "solve_filter",
    "symmetric_factor",
    "update",
    "verify_calibration",
    "write_csv",
]
