"""Endogeneity diagnostics built on the pairwise estimators.

Two tests are provided.  The residual-mean test exploits the fact that when
the intercept is zero and the regressor mean is nonzero, correlation between
regressor and disturbance shifts the mean of the estimated residuals away
from zero; a one-sample t-test detects the shift, and the implied slope bias
can be removed.  The covariance test uses the scaled average cross product
of pairwise regressor and residual differences, which is mean-zero under
exogeneity; its null distribution is obtained either from the simulated
Brownian-functional law or by jackknifing the statistic.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import (
    EstimatorConfig,
    FitResult,
    Method,
    PairKind,
    PairScheme,
    Sample,
    WeightKind,
    config_with,
    fit,
)
from .inference import (
    BrownianSimConfig,
    CriticalValueTable,
    JackknifeConfig,
    critical_values,
    simulate_prop2_null,
    _replicate_rng,
)

__all__ = [
    "TestKind",
    "NullSource",
    "TestReport",
    "ScreeningEntry",
    "residual_mean_test",
    "bias_corrected_slope",
    "covariance_statistic",
    "covariance_test",
    "iv_screening",
]


class TestKind(enum.Enum):
    __test__ = False  # not a pytest collection target

    RESIDUAL_MEAN = "residual"
    COVARIANCE = "covariance"


class NullSource(enum.Enum):
    ANALYTIC_T = "t"
    SIMULATED_BROWNIAN = "brownian"
    JACKKNIFE = "jackknife"


@dataclass
class TestReport:
    """Outcome of an endogeneity test."""

    statistic: float
    test_kind: TestKind
    weight_kind: WeightKind
    null_source: NullSource
    critical_values: tuple[float, float, float] | None = None  # (lower, upper, alpha)
    reject: bool | None = None
    delta_hat: float | None = None
    p_value: float | None = None

    __test__ = False  # not a pytest collection target

    def __post_init__(self) -> None:
        if (self.reject is None) != (self.critical_values is None):
            raise ValueError("reject must be present exactly when critical_values is")


def residual_mean_test(fit_result: FitResult, alpha: float = 0.05) -> TestReport:
    """t-test that the mean of the residuals from a zero-intercept fit is zero.

    A nonzero residual mean signals endogeneity provided the regressor mean
    is bounded away from zero; the implied slope bias is reported as
    ``delta_hat`` = -mean(residuals)/mean(x).
    """
    if fit_result.config.intercept != "zero":
        raise ValueError("residual test requires zero-intercept model")
    n = fit_result.n
    if n < 3:
        raise ValueError("residual test requires n >= 3")
    if abs(fit_result.x_mean) < 0.1 * fit_result.x_sd:
        warnings.warn(
            "regressor mean is close to zero; the residual-mean test has little power",
            stacklevel=2,
        )
    u = fit_result.residuals
    mean = float(np.mean(u))
    sd = float(np.std(u, ddof=1))
    if sd == 0.0:
        # exact fit: a zero mean carries no evidence, a nonzero one is
        # infinitely strong
        statistic = 0.0 if mean == 0.0 else math.inf * math.copysign(1.0, mean)
    else:
        statistic = mean / (sd / math.sqrt(n))
    df = n - 1
    p_value = 2.0 * float(stats.t.sf(abs(statistic), df))
    t_crit = float(stats.t.ppf(1.0 - alpha / 2.0, df))
    delta_hat = -mean / fit_result.x_mean if fit_result.x_mean != 0.0 else None
    return TestReport(
        statistic=statistic,
        test_kind=TestKind.RESIDUAL_MEAN,
        weight_kind=fit_result.config.weight,
        null_source=NullSource.ANALYTIC_T,
        critical_values=(-t_crit, t_crit, alpha),
        reject=abs(statistic) > t_crit,
        delta_hat=delta_hat,
        p_value=p_value,
    )


def bias_corrected_slope(fit_result: FitResult) -> float:
    """Slope with the residual-mean bias estimate removed.

    Returns beta1_hat + mean(residuals)/mean(x); requires a zero-intercept
    fit with nonzero regressor mean.
    """
    if fit_result.config.intercept != "zero":
        raise ValueError("bias correction requires zero-intercept model")
    if fit_result.x_mean == 0.0:
        raise ValueError("mean of regressor is zero; correction undefined")
    return fit_result.beta1_hat + float(np.mean(fit_result.residuals)) / fit_result.x_mean


def covariance_statistic(sample: Sample, fit_result: FitResult) -> float:
    """S = n^{-2} * sum over pairs p > q of (x_p - x_q)(u_p - u_q).

    Computed in O(n) via sum_{p>q} dx du = n sum(x u) - sum(x) sum(u);
    the quadratic-time oracle is kept alongside for verification.
    """
    x = sample.x
    u = np.asarray(fit_result.residuals, dtype=float)
    n = x.shape[0]
    total = n * float(np.dot(x, u)) - float(np.sum(x)) * float(np.sum(u))
    return total / (n * n)


def _covariance_statistic_pairs(sample: Sample, fit_result: FitResult) -> float:
    """O(n^2) double-sum oracle for :func:`covariance_statistic`."""
    x = sample.x
    u = np.asarray(fit_result.residuals, dtype=float)
    n = x.shape[0]
    dx = x[:, None] - x[None, :]
    du = u[:, None] - u[None, :]
    rows, cols = np.tril_indices(n, k=-1)
    return float(np.sum(dx[rows, cols] * du[rows, cols])) / (n * n)


_DEFAULT_TEST_CONFIG = EstimatorConfig(
    scheme=PairScheme(PairKind.FULL_PAIRWISE),
    weight=WeightKind.ABS_DELTA_X,
    method=Method.WEIGHTED_AVERAGE,
    intercept="zero",
)


def _scaled_statistic(sample: Sample, config: EstimatorConfig) -> float:
    """Covariance statistic scaled by estimated sigma_x * sigma_u.

    The disturbance scale is estimated from the residuals of the
    quadratic-loss (least-squares-equivalent) fit rather than from the
    tested weighted-average fit: scaling by the tested fit's own residuals
    would bound the statistic inside [-1, 1] and destroy the test, because
    that fit's residual spread absorbs exactly the signal being measured.
    """
    fit_result = fit(sample, config)
    s = covariance_statistic(sample, fit_result)
    consistent = fit(sample, config_with(config, method=Method.QUADRATIC_LOSS))
    sigma_x = float(np.std(sample.x, ddof=1))
    sigma_u = float(np.std(consistent.residuals, ddof=1))
    if sigma_x == 0.0 or sigma_u == 0.0:
        return 0.0
    return s / (sigma_x * sigma_u)


def covariance_test(
    sample: Sample,
    config: EstimatorConfig = _DEFAULT_TEST_CONFIG,
    alpha: float = 0.05,
    null_source: NullSource = NullSource.SIMULATED_BROWNIAN,
    sim_config: BrownianSimConfig | None = None,
    cv_table: CriticalValueTable | None = None,
    jk: JackknifeConfig | None = None,
) -> TestReport:
    """Two-sided covariance test of exogeneity.

    The simulated Brownian null applies only to the signed-difference
    weighting, whose limit law the simulator reproduces; the jackknife null
    re-computes the scaled statistic on delete-d subsamples and rejects when
    zero falls outside the replicate quantiles.  A precomputed
    ``cv_table`` bypasses simulation.
    """
    if config.method is Method.QUADRATIC_LOSS:
        raise ValueError(
            "covariance test requires the weighted-average estimator; the "
            "quadratic-loss fit forces the statistic to zero by construction"
        )
    statistic = _scaled_statistic(sample, config)
    if null_source is NullSource.SIMULATED_BROWNIAN:
        if config.weight is not WeightKind.DELTA_X:
            raise ValueError(
                "simulated Brownian null is only valid for the signed-difference "
                "weighting; use the jackknife null for other weights"
            )
        if cv_table is None:
            cv_table = critical_values(
                simulate_prop2_null(sim_config or BrownianSimConfig()),
                [alpha],
                config=sim_config,
            )
        lower, upper = cv_table.lookup(alpha)
        reject = not (lower <= statistic <= upper)
    elif null_source is NullSource.JACKKNIFE:
        jk = jk or JackknifeConfig(alpha=alpha)
        n = sample.n
        d = jk.validate(n)
        replicates = np.empty(jk.R)
        for r in range(jk.R):
            rng = _replicate_rng(jk.seed, r)
            idx = rng.choice(n, size=n - d, replace=False)
            replicates[r] = _scaled_statistic(
                Sample(sample.x[idx], sample.y[idx]), config
            )
        lower, upper = (
            float(q) for q in np.quantile(replicates, [alpha / 2.0, 1.0 - alpha / 2.0])
        )
        reject = not (lower <= 0.0 <= upper)
    else:
        raise ValueError(f"unsupported null source for covariance test: {null_source}")
    return TestReport(
        statistic=statistic,
        test_kind=TestKind.COVARIANCE,
        weight_kind=config.weight,
        null_source=null_source,
        critical_values=(float(lower), float(upper), alpha),
        reject=bool(reject),
    )


@dataclass
class ScreeningEntry:
    """One model in an instrument-screening ranking."""

    label: str
    statistic: float | None
    abs_statistic: float | None
    feasible: bool
    selected: bool = False


def iv_screening(
    sample: Sample,
    candidates: list[np.ndarray],
    config: EstimatorConfig = _DEFAULT_TEST_CONFIG,
    labels: list[str] | None = None,
) -> list[ScreeningEntry]:
    """Rank candidate instrument transforms by absolute covariance statistic.

    For each candidate vector g the model is re-expressed in the transformed
    variables (g*x, g*y) and the covariance statistic recomputed; models are
    returned sorted ascending by absolute statistic with the minimum flagged
    as selected.  The untransformed model is always included first under the
    label "original".  Candidates whose transform degenerates (constant or
    non-finite regressor) are marked infeasible and excluded from ranking.
    """
    if labels is not None and len(labels) != len(candidates):
        raise ValueError("labels and candidates lengths differ")
    entries: list[ScreeningEntry] = []

    def evaluate(label: str, x: np.ndarray, y: np.ndarray) -> ScreeningEntry:
        try:
            s = Sample(x, y)
            fit_result = fit(s, config)
            stat = covariance_statistic(s, fit_result)
        except (ValueError, ZeroDivisionError):
            return ScreeningEntry(label=label, statistic=None, abs_statistic=None, feasible=False)
        return ScreeningEntry(
            label=label, statistic=stat, abs_statistic=abs(stat), feasible=True
        )

    entries.append(evaluate("original", sample.x, sample.y))
    for idx, g in enumerate(candidates):
        g = np.asarray(g, dtype=float)
        if g.shape[0] != sample.n:
            raise ValueError(f"candidate {idx} has length {g.shape[0]}, expected {sample.n}")
        label = labels[idx] if labels is not None else f"candidate_{idx}"
        entries.append(evaluate(label, g * sample.x, g * sample.y))
    feasible = [e for e in entries if e.feasible]
    infeasible = [e for e in entries if not e.feasible]
    feasible.sort(key=lambda e: e.abs_statistic)
    if feasible:
        feasible[0].selected = True
    return feasible + infeasible
