"""Pairwise-slope estimators for the univariate linear model.

Estimators are built from the slopes of observation pairs.  Pairs come from
one of two schemes (adjacent observations, or every unordered pair), each
optionally applied after a stable ascending sort on the regressor.  Pair
slopes are combined either as a weighted average or as the minimiser of a
weighted quadratic loss, under one of four weight kinds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

__all__ = [
    "PairKind",
    "WeightKind",
    "Method",
    "PairScheme",
    "EstimatorConfig",
    "Sample",
    "PairIndex",
    "FitResult",
    "DegenerateSampleError",
    "ZeroWeightSumError",
    "enumerate_pairs",
    "pairwise_slope",
    "pair_weight",
    "estimate_slope",
    "estimate_intercept_from_means",
    "estimate_intercept_weighted",
    "fit",
]

# Chunk of pair-block rows processed per pass in the implicit O(n^2) paths.
# Within a chunk numpy's pairwise summation keeps round-off small; the chunk
# partials are then combined with math.fsum (compensated summation), so the
# reduction is deterministic for a fixed chunk size.
CHUNK_ROWS = 256

# Above this sample size the full-pairwise paths switch to algebraically
# equivalent O(n log n) closed forms when one exists for the requested
# weight/method (ties still force the streaming path because degenerate
# pairs must be dropped pair by pair).
CLOSED_FORM_MIN_N = 1024


class DegenerateSampleError(ValueError):
    """All candidate pairs have a zero regressor difference."""


class ZeroWeightSumError(ValueError):
    """The weights of the non-degenerate pairs sum to zero."""


class PairKind(enum.Enum):
    ADJACENT = "adjacent"
    FULL_PAIRWISE = "full"


class WeightKind(enum.Enum):
    DELTA_X = "dx"
    ABS_DELTA_X = "absdx"
    EUCLIDEAN = "euclid"
    SQRT_ABS_DELTA_X = "sqrtabsdx"


class Method(enum.Enum):
    WEIGHTED_AVERAGE = "avg"
    QUADRATIC_LOSS = "loss"


@dataclass(frozen=True)
class PairScheme:
    """Pairing rule: which pairs are formed, and whether x is sorted first."""

    kind: PairKind
    sorted: bool = False

    def pair_count(self, n: int) -> int:
        if self.kind is PairKind.ADJACENT:
            return n - 1
        return n * (n - 1) // 2


@dataclass(frozen=True)
class EstimatorConfig:
    """Full estimator selection: scheme x weight x method x intercept mode.

    ``intercept`` is one of ``"means"`` (from sample means), ``"weighted"``
    (weighted average of pairwise intercepts) or ``"zero"`` (intercept fixed
    at zero, as required by the residual-mean endogeneity test).
    """

    scheme: PairScheme = field(default_factory=lambda: PairScheme(PairKind.FULL_PAIRWISE))
    weight: WeightKind = WeightKind.ABS_DELTA_X
    method: Method = Method.WEIGHTED_AVERAGE
    intercept: str = "means"

    def __post_init__(self) -> None:
        if self.intercept not in ("means", "weighted", "zero"):
            raise ValueError(f"unknown intercept mode: {self.intercept!r}")


@dataclass
class Sample:
    """Paired observation vectors (x, y) of equal length n >= 2."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.ndim != 1 or self.y.ndim != 1:
            raise ValueError("x and y must be one-dimensional")
        if self.x.shape[0] != self.y.shape[0]:
            raise ValueError("x and y must have the same length")
        if self.x.shape[0] < 2:
            raise ValueError("insufficient observations: need n >= 2")
        if not (np.isfinite(self.x).all() and np.isfinite(self.y).all()):
            raise ValueError("x and y must be finite")

    @property
    def n(self) -> int:
        return self.x.shape[0]


class PairIndex(NamedTuple):
    """Indices (i, j) of a pair, oriented i > j in the pairing arrangement.

    Indices refer to the original sample positions; for sorted schemes the
    orientation follows the sorted arrangement while the indices map back to
    the original rows.
    """

    i: int
    j: int


@dataclass
class FitResult:
    """Bundled estimation output of :func:`fit`."""

    beta0_hat: float
    beta1_hat: float
    residuals: np.ndarray
    config: EstimatorConfig
    n: int
    dropped_pairs: int
    x_mean: float
    x_sd: float


def _arrangement(scheme: PairScheme, x: np.ndarray) -> np.ndarray:
    """Observation order in which pairs are formed (original indices)."""
    if scheme.sorted:
        return np.argsort(x, kind="stable")
    return np.arange(x.shape[0])


def enumerate_pairs(scheme: PairScheme, x) -> list[PairIndex]:
    """List the pairs of a scheme in canonical order.

    Adjacent yields ``(order[k+1], order[k])`` for consecutive positions;
    full-pairwise yields every ``(order[a], order[b])`` with ``a > b``,
    ordered by ``a`` ascending then ``b`` ascending.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise ValueError("insufficient observations: need n >= 2")
    order = _arrangement(scheme, x)
    n = x.shape[0]
    if scheme.kind is PairKind.ADJACENT:
        return [PairIndex(int(order[k + 1]), int(order[k])) for k in range(n - 1)]
    return [
        PairIndex(int(order[a]), int(order[b]))
        for a in range(1, n)
        for b in range(a)
    ]


def pairwise_slope(sample: Sample, pair: PairIndex) -> float:
    """Slope of the line through observations i and j: (y_i - y_j)/(x_i - x_j)."""
    dx = sample.x[pair.i] - sample.x[pair.j]
    if dx == 0.0:
        raise DegenerateSampleError(f"degenerate pair {pair}: zero x difference")
    return float((sample.y[pair.i] - sample.y[pair.j]) / dx)


def _sgn(a: np.ndarray) -> np.ndarray:
    # sign convention with sgn(0) = 1
    return np.where(a >= 0.0, 1.0, -1.0)


def pair_weight(kind: WeightKind, sample: Sample, pair: PairIndex) -> float:
    """Weight of a single pair under the given weight kind."""
    dx = float(sample.x[pair.i] - sample.x[pair.j])
    if kind is WeightKind.DELTA_X:
        return dx
    if kind is WeightKind.ABS_DELTA_X:
        return abs(dx)
    if kind is WeightKind.SQRT_ABS_DELTA_X:
        return math.sqrt(abs(dx))
    dy = float(sample.y[pair.i] - sample.y[pair.j])
    return math.hypot(dx, dy)


def _pair_terms(
    dx: np.ndarray, dy: np.ndarray, weight: WeightKind, method: Method
) -> tuple[np.ndarray, np.ndarray]:
    """Per-pair (denominator, numerator) terms for non-degenerate pairs.

    The estimate is sum(numerator)/sum(denominator).  For the weighted
    average the terms are (w, w*beta); for the quadratic loss (w^2, w^2*beta).
    Expressions are arranged so no intermediate slope 0/0 is formed.
    """
    if method is Method.WEIGHTED_AVERAGE:
        if weight is WeightKind.DELTA_X:
            return dx, dy
        if weight is WeightKind.ABS_DELTA_X:
            return np.abs(dx), _sgn(dx) * dy
        if weight is WeightKind.SQRT_ABS_DELTA_X:
            root = np.sqrt(np.abs(dx))
            return root, root * dy / dx
        h = np.hypot(dx, dy)
        return h, h * dy / dx
    # quadratic loss
    if weight in (WeightKind.DELTA_X, WeightKind.ABS_DELTA_X):
        return dx * dx, dx * dy
    if weight is WeightKind.SQRT_ABS_DELTA_X:
        return np.abs(dx), _sgn(dx) * dy
    h2 = dx * dx + dy * dy
    return h2, h2 * dy / dx


def _adjacent_sums(
    xs: np.ndarray, ys: np.ndarray, weight: WeightKind, method: Method
) -> tuple[float, float, int]:
    dx = np.diff(xs)
    dy = np.diff(ys)
    keep = dx != 0.0
    dropped = int(dx.shape[0] - np.count_nonzero(keep))
    if dropped:
        dx, dy = dx[keep], dy[keep]
    if dx.shape[0] == 0:
        raise DegenerateSampleError("all pairs degenerate: x is constant")
    den, num = _pair_terms(dx, dy, weight, method)
    return float(np.sum(den)), float(np.sum(num)), dropped


def _full_streaming_sums(
    xs: np.ndarray, ys: np.ndarray, weight: WeightKind, method: Method
) -> tuple[float, float, int]:
    """Implicit full-pairwise accumulation without materialising all pairs.

    Iterates blocks of rows i against all j < i via broadcasting; chunk
    partial sums are combined with compensated summation.
    """
    n = xs.shape[0]
    den_parts: list[float] = []
    num_parts: list[float] = []
    dropped = 0
    for start in range(1, n, CHUNK_ROWS):
        stop = min(start + CHUNK_ROWS, n)
        block = np.arange(start, stop)
        dx = xs[block, None] - xs[None, :stop]
        dy = ys[block, None] - ys[None, :stop]
        mask = block[:, None] > np.arange(stop)[None, :]
        degenerate = mask & (dx == 0.0)
        ndeg = int(np.count_nonzero(degenerate))
        if ndeg:
            dropped += ndeg
            mask &= dx != 0.0
        dxk = dx[mask]
        dyk = dy[mask]
        if dxk.shape[0] == 0:
            continue
        den, num = _pair_terms(dxk, dyk, weight, method)
        den_parts.append(float(np.sum(den)))
        num_parts.append(float(np.sum(num)))
    if not den_parts:
        raise DegenerateSampleError("all pairs degenerate: x is constant")
    return math.fsum(den_parts), math.fsum(num_parts), dropped


def _full_closed_form(
    xs: np.ndarray, ys: np.ndarray, weight: WeightKind, method: Method, sorted_scheme: bool
) -> tuple[float, float] | None:
    """O(n log n) closed forms for tie-free full-pairwise sums, when available.

    Uses two identities over all pairs i > j:
      sum (x_i - x_j)           = sum_k (2k - n + 1) x_(k)   (position coefficients)
      sum (x_i - x_j)(y_i - y_j) = n sum x y - (sum x)(sum y)
    The first applies in arrival order for signed differences and in rank
    order for absolute differences.
    """
    n = xs.shape[0]
    if method is Method.QUADRATIC_LOSS and weight in (
        WeightKind.DELTA_X,
        WeightKind.ABS_DELTA_X,
    ):
        sx, sy = np.sum(xs), np.sum(ys)
        den = n * np.sum(xs * xs) - sx * sx
        num = n * np.sum(xs * ys) - sx * sy
        return float(den), float(num)
    absolute = (
        weight is WeightKind.ABS_DELTA_X
        or (weight is WeightKind.DELTA_X and sorted_scheme)
        or (weight is WeightKind.SQRT_ABS_DELTA_X and method is Method.QUADRATIC_LOSS)
    )
    signed = weight is WeightKind.DELTA_X and not sorted_scheme
    if method is Method.WEIGHTED_AVERAGE and (absolute or signed):
        if absolute:
            order = np.argsort(xs, kind="stable")
            xo, yo = xs[order], ys[order]
        else:
            xo, yo = xs, ys
        coef = 2.0 * np.arange(n) - (n - 1.0)
        return float(np.sum(coef * xo)), float(np.sum(coef * yo))
    if method is Method.QUADRATIC_LOSS and weight is WeightKind.SQRT_ABS_DELTA_X:
        order = np.argsort(xs, kind="stable")
        coef = 2.0 * np.arange(n) - (n - 1.0)
        return float(np.sum(coef * xs[order])), float(np.sum(coef * ys[order]))
    return None


def _slope_sums(sample: Sample, config: EstimatorConfig) -> tuple[float, float, int]:
    """(denominator, numerator, dropped_pairs) of the configured estimator."""
    scheme = config.scheme
    order = _arrangement(scheme, sample.x)
    xs = sample.x[order]
    ys = sample.y[order]
    if scheme.kind is PairKind.ADJACENT:
        return _adjacent_sums(xs, ys, config.weight, config.method)
    n = xs.shape[0]
    if n >= CLOSED_FORM_MIN_N and np.unique(sample.x).shape[0] == n:
        closed = _full_closed_form(xs, ys, config.weight, config.method, scheme.sorted)
        if closed is not None:
            den, num = closed
            return den, num, 0
    return _full_streaming_sums(xs, ys, config.weight, config.method)


def estimate_slope(sample: Sample, config: EstimatorConfig) -> float:
    """Slope estimate under the configured pairing, weighting and method.

    Weighted average: sum(w_p beta_p)/sum(w_p) over non-degenerate pairs;
    quadratic loss: sum(w_p^2 beta_p)/sum(w_p^2).  Pairs with a zero x
    difference are dropped.
    """
    den, num, _ = _slope_sums(sample, config)
    if den == 0.0:
        raise ZeroWeightSumError("weights sum to zero")
    return num / den


def estimate_intercept_from_means(sample: Sample, beta1_hat: float) -> float:
    """Intercept from sample means: mean(y) - beta1_hat * mean(x)."""
    return float(np.mean(sample.y) - beta1_hat * np.mean(sample.x))


def estimate_intercept_weighted(sample: Sample, config: EstimatorConfig) -> float:
    """Weighted average of the pairwise intercepts y_i - beta_p x_i.

    Only the adjacent non-sorted absolute-difference configuration has an
    analysed consistency argument; other configurations are permitted but
    should be treated as exploratory.
    """
    scheme = config.scheme
    order = _arrangement(scheme, sample.x)
    xs = sample.x[order]
    ys = sample.y[order]
    n = xs.shape[0]

    def accumulate(dx, dy, xi, yi):
        keep = dx != 0.0
        dx, dy, xi, yi = dx[keep], dy[keep], xi[keep], yi[keep]
        if dx.shape[0] == 0:
            return 0.0, 0.0
        den, _ = _pair_terms(dx, dy, config.weight, config.method)
        beta0p = yi - (dy / dx) * xi
        return float(np.sum(den)), float(np.sum(den * beta0p))

    if scheme.kind is PairKind.ADJACENT:
        den, num = accumulate(np.diff(xs), np.diff(ys), xs[1:], ys[1:])
        den_parts, num_parts = [den], [num]
    else:
        den_parts, num_parts = [], []
        for start in range(1, n, CHUNK_ROWS):
            stop = min(start + CHUNK_ROWS, n)
            block = np.arange(start, stop)
            dx = xs[block, None] - xs[None, :stop]
            dy = ys[block, None] - ys[None, :stop]
            mask = block[:, None] > np.arange(stop)[None, :]
            xi = np.broadcast_to(xs[block, None], dx.shape)
            yi = np.broadcast_to(ys[block, None], dy.shape)
            den, num = accumulate(dx[mask], dy[mask], xi[mask], yi[mask])
            den_parts.append(den)
            num_parts.append(num)
    den = math.fsum(den_parts)
    num = math.fsum(num_parts)
    if den == 0.0:
        if all(p == 0.0 for p in den_parts):
            raise DegenerateSampleError("all pairs degenerate: x is constant")
        raise ZeroWeightSumError("weights sum to zero")
    return num / den


def fit(sample: Sample, config: EstimatorConfig) -> FitResult:
    """Estimate slope and intercept and bundle residuals and diagnostics.

    The intercept follows ``config.intercept``: sample means (default),
    weighted pairwise intercepts, or fixed at zero.
    """
    den, num, dropped = _slope_sums(sample, config)
    if den == 0.0:
        raise ZeroWeightSumError("weights sum to zero")
    beta1 = num / den
    if config.intercept == "zero":
        beta0 = 0.0
    elif config.intercept == "weighted":
        beta0 = estimate_intercept_weighted(sample, config)
    else:
        beta0 = estimate_intercept_from_means(sample, beta1)
    residuals = sample.y - beta0 - beta1 * sample.x
    return FitResult(
        beta0_hat=float(beta0),
        beta1_hat=float(beta1),
        residuals=residuals,
        config=config,
        n=sample.n,
        dropped_pairs=dropped,
        x_mean=float(np.mean(sample.x)),
        x_sd=float(np.std(sample.x, ddof=1)),
    )


def config_with(config: EstimatorConfig, **changes) -> EstimatorConfig:
    """Frozen-dataclass update helper used across modules."""
    return replace(config, **changes)
