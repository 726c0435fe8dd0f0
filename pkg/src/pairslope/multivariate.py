"""Matrix formulation of the pairwise estimators and the K-regressor fit.

Each coefficient is estimated by partialling the remaining regressors (and
the constant) out of both the response and the regressor of interest with
the annihilator matrix, then running the univariate pairwise estimator on
the partialled pair.  Dense difference matrices are provided for small-n
equivalence checks against the implicit streaming path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DegenerateSampleError,
    EstimatorConfig,
    FitResult,
    PairKind,
    PairScheme,
    Sample,
    config_with,
    enumerate_pairs,
    fit,
)

__all__ = [
    "DENSE_GUARD",
    "DesignMatrix",
    "DifferenceOperator",
    "MultiFitResult",
    "build_difference_matrix",
    "sort_permutation_matrix",
    "residual_maker",
    "fit_multivariate",
    "pairwise_parameters_dense",
]

# Largest n for which dense difference matrices may be materialised; the
# full-pairwise matrix has n(n-1)/2 rows, so this caps memory at ~500 MB.
DENSE_GUARD = 512

_RANK_RTOL = 1e-10


@dataclass
class DesignMatrix:
    """Regressor matrix X (n x K, constant excluded) and response y."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.y.ndim != 1:
            raise ValueError("X must be 2-d and y 1-d")
        n, k = self.X.shape
        if self.y.shape[0] != n:
            raise ValueError("X and y row counts differ")
        if n <= k + 1:
            raise ValueError("need n > K + 1 observations")
        if not (np.isfinite(self.X).all() and np.isfinite(self.y).all()):
            raise ValueError("X and y must be finite")
        s = np.linalg.svd(self.X - self.X.mean(axis=0), compute_uv=False)
        if s[-1] <= _RANK_RTOL * s[0]:
            raise ValueError("collinear regressors")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]


@dataclass
class DifferenceOperator:
    """A pairwise difference operator, optionally materialised densely.

    Dense representation: the adjacent matrix is (n-1) x n and the
    full-pairwise matrix n(n-1)/2 x n; each row has one +1 and one -1.
    """

    scheme: PairScheme
    n: int
    representation: str
    matrix: np.ndarray | None = None

    def apply(self, v: np.ndarray) -> np.ndarray:
        if self.matrix is None:
            raise ValueError("operator has no dense representation")
        return self.matrix @ v


@dataclass
class MultiFitResult:
    """Coefficient vector, intercept, residuals and per-regressor fits."""

    beta_hat: np.ndarray
    beta0_hat: float
    residuals: np.ndarray
    per_regressor: list[FitResult]


def build_difference_matrix(scheme: PairScheme, n: int) -> DifferenceOperator:
    """Dense difference matrix in canonical pair order over positions 0..n-1.

    Rows follow the canonical pair order (i ascending, then j ascending);
    sorting is handled separately via :func:`sort_permutation_matrix`.
    """
    if n < 2:
        raise ValueError("insufficient observations: need n >= 2")
    if n > DENSE_GUARD:
        raise ValueError(
            f"n={n} exceeds the dense guard ({DENSE_GUARD}); use the implicit path"
        )
    pairs = enumerate_pairs(PairScheme(scheme.kind, sorted=False), np.arange(n, dtype=float))
    D = np.zeros((len(pairs), n))
    for row, (i, j) in enumerate(pairs):
        D[row, i] = 1.0
        D[row, j] = -1.0
    return DifferenceOperator(scheme=scheme, n=n, representation="dense", matrix=D)


def sort_permutation_matrix(x: np.ndarray) -> np.ndarray:
    """Permutation matrix that reorders a vector ascending in x (stable)."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    S = np.zeros((x.shape[0], x.shape[0]))
    S[np.arange(x.shape[0]), order] = 1.0
    return S


def residual_maker(X: np.ndarray, k: int) -> np.ndarray:
    """Annihilator of the constant and every regressor except column k.

    Returns the symmetric idempotent M_k = I - A (A'A)^{-1} A' with
    A = [1, X without column k]; multiplying by M_k partials those
    variables out.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    others = np.delete(X, k, axis=1)
    A = np.column_stack([np.ones(n), others])
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= _RANK_RTOL * s[0]:
        raise ValueError("collinear regressors")
    # Solve instead of forming the inverse explicitly.
    proj = A @ np.linalg.solve(A.T @ A, A.T)
    return np.eye(n) - proj


def fit_multivariate(design: DesignMatrix, config: EstimatorConfig) -> MultiFitResult:
    """Per-regressor partialled pairwise fit of a K-regressor model.

    For each k the remaining regressors and the constant are partialled out
    of (x_k, y); the univariate estimator configured by ``config`` is then
    applied to the partialled pair.  The intercept is recovered from sample
    means.  Sorting, when requested, sorts by the partialled regressor.
    """
    beta = np.empty(design.k)
    per_regressor: list[FitResult] = []
    sub_config = config_with(config, intercept="zero")
    for k in range(design.k):
        M = residual_maker(design.X, k)
        xk = M @ design.X[:, k]
        yk = M @ design.y
        if np.ptp(xk) == 0.0:
            raise DegenerateSampleError(
                f"regressor {k} is collinear with the others: partialled values constant"
            )
        sub_fit = fit(Sample(xk, yk), sub_config)
        beta[k] = sub_fit.beta1_hat
        per_regressor.append(sub_fit)
    beta0 = float(np.mean(design.y) - design.X.mean(axis=0) @ beta)
    residuals = design.y - beta0 - design.X @ beta
    return MultiFitResult(
        beta_hat=beta,
        beta0_hat=beta0,
        residuals=residuals,
        per_regressor=per_regressor,
    )


def pairwise_parameters_dense(sample: Sample, scheme: PairScheme) -> np.ndarray:
    """Pairwise slope vector via the dense matrix pipeline (small-n oracle).

    Computes diag(D x)^{-1} D y over the (optionally sorted) arrangement.
    Degenerate pairs are excluded, mirroring the streaming path.
    """
    op = build_difference_matrix(scheme, sample.n)
    if scheme.sorted:
        S = sort_permutation_matrix(sample.x)
        xs, ys = S @ sample.x, S @ sample.y
    else:
        xs, ys = sample.x, sample.y
    dx = op.apply(xs)
    dy = op.apply(ys)
    keep = dx != 0.0
    return dy[keep] / dx[keep]
