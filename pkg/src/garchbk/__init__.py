"""GARCH(p,q) simulation and Bahadur-Kiefer remainder Monte Carlo."""

from .bahadur import (
    BkResult,
    RateConstants,
    RateFit,
    bk_remainder,
    kiefer_remainder,
    rate_constants,
    rate_fit,
)
from .empirical import (
    ProcessEvaluation,
    SortedSample,
    ecdf,
    empirical_process,
    equantile,
    lil_statistic,
    oscillation_statistic,
    quantile_process,
    uniform_processes,
)
from .garch import (
    DivergenceError,
    GarchParams,
    LyapunovEstimate,
    NonStationaryError,
    PathSample,
    StationarityVerdict,
    arch_infinity_coeffs,
    autocovariance_x2,
    companion_matrix,
    companion_offset,
    inverse_sigma_variance,
    is_stationary,
    lyapunov_exponent,
    simulate,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    MarginalSettings,
    derive_seed,
    load_config,
    run_cell,
    run_experiment,
    summarize,
)
from .innovations import InnovationModel, gaussian, student_t
from .marginal import MarginalModel, build_marginal, pit

__version__ = "0.1.0"

__all__ = [
    "BkResult",
    "DivergenceError",
    "ExperimentConfig",
    "ExperimentResult",
    "GarchParams",
    "InnovationModel",
    "LyapunovEstimate",
    "MarginalModel",
    "MarginalSettings",
    "NonStationaryError",
    "PathSample",
    "ProcessEvaluation",
    "RateConstants",
    "RateFit",
    "SortedSample",
    "StationarityVerdict",
    "arch_infinity_coeffs",
    "autocovariance_x2",
    "bk_remainder",
    "build_marginal",
    "companion_matrix",
    "companion_offset",
    "derive_seed",
    "ecdf",
    "empirical_process",
    "equantile",
    "gaussian",
    "inverse_sigma_variance",
    "is_stationary",
    "kiefer_remainder",
    "lil_statistic",
    "load_config",
    "lyapunov_exponent",
    "oscillation_statistic",
    "pit",
    "quantile_process",
    "rate_constants",
    "rate_fit",
    "run_cell",
    "run_experiment",
    "simulate",
    "student_t",
    "summarize",
    "uniform_processes",
    "__version__",
]
