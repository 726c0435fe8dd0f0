"""Pairwise-slope regression: estimators, endogeneity tests, inference, Monte Carlo."""

__version__ = "0.1.0"

from .core import (
    DegenerateSampleError,
    EstimatorConfig,
    FitResult,
    Method,
    PairIndex,
    PairKind,
    PairScheme,
    Sample,
    WeightKind,
    ZeroWeightSumError,
    enumerate_pairs,
    estimate_intercept_from_means,
    estimate_intercept_weighted,
    estimate_slope,
    fit,
    pair_weight,
    pairwise_slope,
)
from .endogeneity import (
    NullSource,
    TestKind,
    TestReport,
    bias_corrected_slope,
    covariance_statistic,
    covariance_test,
    iv_screening,
    residual_mean_test,
)
from .inference import (
    BrownianSimConfig,
    CriticalValueTable,
    JackknifeConfig,
    critical_values,
    jackknife_ci,
    simulate_prop1_ratio,
    simulate_prop2_null,
)
from .montecarlo import (
    DgpSpec,
    Normal,
    SkewedNormal,
    SummaryTable,
    Target,
    Uniform,
    generate,
    load_experiment,
    run_experiment,
)
from .multivariate import (
    DesignMatrix,
    MultiFitResult,
    build_difference_matrix,
    fit_multivariate,
    residual_maker,
)

__all__ = [
    "DegenerateSampleError",
    "EstimatorConfig",
    "FitResult",
    "Method",
    "PairIndex",
    "PairKind",
    "PairScheme",
    "Sample",
    "WeightKind",
    "ZeroWeightSumError",
    "enumerate_pairs",
    "estimate_intercept_from_means",
    "estimate_intercept_weighted",
    "estimate_slope",
    "fit",
    "pair_weight",
    "pairwise_slope",
    "NullSource",
    "TestKind",
    "TestReport",
    "bias_corrected_slope",
    "covariance_statistic",
    "covariance_test",
    "iv_screening",
    "residual_mean_test",
    "BrownianSimConfig",
    "CriticalValueTable",
    "JackknifeConfig",
    "critical_values",
    "jackknife_ci",
    "simulate_prop1_ratio",
    "simulate_prop2_null",
    "DgpSpec",
    "Normal",
    "SkewedNormal",
    "SummaryTable",
    "Target",
    "Uniform",
    "generate",
    "load_experiment",
    "run_experiment",
    "DesignMatrix",
    "MultiFitResult",
    "build_difference_matrix",
    "fit_multivariate",
    "residual_maker",
]
