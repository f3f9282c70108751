"""Factor analysis for tensor-valued time series.

Estimation of the loading spaces of a tensor factor model by pre-averaging
random fibre groups, refinement by iterative projection, and selection of
the number of factors per mode by bootstrapped correlation thresholding.
Includes matching baselines (time-series HOSVD/HOOI), a simulation harness,
and a small CLI.
"""

from .baselines import hooi, hosvd, tucker_fit
from .bench import (
    ESTIMATORS,
    BenchResult,
    projection_error,
    run_benchmark,
    write_replication_csv,
    write_summary_csv,
)
from .dgp import (
    COMMON_NOISE_AR,
    FACTOR_AR,
    IDIO_NOISE_AR,
    SETTINGS,
    DgpConfig,
    DgpGroundTruth,
    ar_stationary_autocovariances,
    capm_betas,
    capm_residuals,
    generate_loadings,
    generate_noise,
    simulate_setting,
    standardized_ar,
)
from .io import (
    ConfigError,
    FormatError,
    fold_rows,
    read_config,
    read_labeled_matrices,
    read_tensor_series,
    write_labeled_matrices,
    write_tensor_series,
)
from .preaverage import (
    DegenerateSampleError,
    FiberSampleSet,
    LoadingEstimate,
    PreaverageConfig,
    eigenvalue_ratio,
    preaverage_direction,
    sample_index_sets,
    sum_fibers,
)
from .projection import (
    ProjectionState,
    estimate_loading_space,
    project_data,
    refine_directions,
)
from .rank import (
    BootstrapWeights,
    RankConfig,
    RankDecision,
    bootstrap_weights,
    correlation_from_covariance,
    estimate_rank,
    rank_threshold,
)
from .tensor_ops import (
    DegenerateDataError,
    EigenDecomposition,
    centered_covariance,
    eigen_sym,
    fold,
    kron_chain_skipping,
    kron_vec_skipping,
    mode_product,
    series_fold,
    series_mode_product,
    series_unfold,
    unfold,
)

__version__ = "0.1.0"

__all__ = [
    "BenchResult",
    "BootstrapWeights",
    "COMMON_NOISE_AR",
    "ConfigError",
    "DegenerateDataError",
    "DegenerateSampleError",
    "DgpConfig",
    "DgpGroundTruth",
    "ESTIMATORS",
    "EigenDecomposition",
    "FACTOR_AR",
    "FiberSampleSet",
    "FormatError",
    "IDIO_NOISE_AR",
    "LoadingEstimate",
    "PreaverageConfig",
    "ProjectionState",
    "RankConfig",
    "RankDecision",
    "SETTINGS",
    "ar_stationary_autocovariances",
    "bootstrap_weights",
    "capm_betas",
    "capm_residuals",
    "centered_covariance",
    "correlation_from_covariance",
    "eigen_sym",
    "eigenvalue_ratio",
    "estimate_loading_space",
    "estimate_rank",
    "fold",
    "fold_rows",
    "generate_loadings",
    "generate_noise",
    "hooi",
    "hosvd",
    "kron_chain_skipping",
    "kron_vec_skipping",
    "mode_product",
    "preaverage_direction",
    "project_data",
    "projection_error",
    "rank_threshold",
    "read_config",
    "read_labeled_matrices",
    "read_tensor_series",
    "refine_directions",
    "run_benchmark",
    "sample_index_sets",
    "series_fold",
    "series_mode_product",
    "series_unfold",
    "simulate_setting",
    "standardized_ar",
    "sum_fibers",
    "tucker_fit",
    "unfold",
    "write_labeled_matrices",
    "write_replication_csv",
    "write_summary_csv",
    "write_tensor_series",
    "__version__",
]
