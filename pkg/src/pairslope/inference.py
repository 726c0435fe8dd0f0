"""Jackknife confidence intervals and Brownian-functional null simulation.

The delete-d jackknife re-estimates the slope on random subsamples and takes
empirical quantiles of the replicates.  The simulators draw from the
non-standard limit laws of the non-sorted signed-difference full-pairwise
estimator: a ratio of two Brownian functionals, and the null law of the
scaled covariance statistic, both discretised as scaled random walks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import EstimatorConfig, Sample, estimate_slope

__all__ = [
    "JackknifeConfig",
    "BrownianSimConfig",
    "CriticalValueTable",
    "jackknife_ci",
    "simulate_prop1_ratio",
    "simulate_prop2_null",
    "critical_values",
]

# Replications simulated per vectorised block; bounds peak memory at roughly
# blocksize * steps doubles per walk.
_SIM_BLOCK = 4096


@dataclass(frozen=True)
class JackknifeConfig:
    """Delete-d jackknife settings.

    ``d`` is the number of observations removed per replicate (default
    ceil(n/2), resolved against the sample at call time); ``R`` the number
    of replicates.  Validity at sample size n requires sqrt(n) < d < n,
    R >= 100 and R < C(n, d).
    """

    d: int | None = None
    R: int = 10000
    alpha: float = 0.05
    seed: int = 0

    def resolve_d(self, n: int) -> int:
        return self.d if self.d is not None else math.ceil(n / 2)

    def validate(self, n: int) -> int:
        d = self.resolve_d(n)
        if not math.sqrt(n) < d:
            raise ValueError(f"jackknife requires d > sqrt(n): d={d}, n={n}")
        if not d < n:
            raise ValueError(f"jackknife requires d < n: d={d}, n={n}")
        if self.R < 100:
            raise ValueError(f"jackknife requires R >= 100: R={self.R}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        # C(n, d) overflows no sooner than it exceeds any practical R.
        if n <= 64 and self.R >= math.comb(n, d):
            raise ValueError(
                f"jackknife requires R < C(n, d) distinct subsamples: R={self.R}"
            )
        return d


@dataclass(frozen=True)
class BrownianSimConfig:
    """Random-walk discretisation settings for the limit-law simulators."""

    steps: int = 10000
    reps: int = 50000
    seed: int = 0
    sigma_x: float = 1.0
    sigma_u: float = 1.0

    def __post_init__(self) -> None:
        if self.steps < 100:
            raise ValueError("steps must be >= 100")
        if self.reps < 1000:
            raise ValueError("reps must be >= 1000")


@dataclass
class CriticalValueTable:
    """Two-sided empirical critical values per significance level."""

    rows: list[tuple[float, float, float]]  # (alpha, lower, upper)
    source: str = "Prop2Statistic"
    config: BrownianSimConfig | None = None

    def lookup(self, alpha: float) -> tuple[float, float]:
        for a, lower, upper in self.rows:
            if math.isclose(a, alpha):
                return lower, upper
        raise KeyError(f"no critical values for alpha={alpha}")

    def to_csv(self) -> str:
        lines = ["alpha,lower,upper"]
        lines += [f"{a},{lo!r},{up!r}" for a, lo, up in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "source": self.source,
                "rows": [
                    {"alpha": a, "lower": lo, "upper": up} for a, lo, up in self.rows
                ],
            },
            indent=2,
        )


def _replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one task, a function of (master seed, index) only."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def jackknife_ci(
    sample: Sample, estimator_config: EstimatorConfig, jk: JackknifeConfig
) -> tuple[float, float, np.ndarray]:
    """Delete-d jackknife interval for the slope.

    Each replicate draws n-d observations uniformly without replacement and
    re-estimates; the bounds are the empirical alpha/2 and 1-alpha/2
    quantiles of the replicates.  Replicate randomness depends only on the
    master seed and the replicate index, so execution order is immaterial.
    """
    n = sample.n
    d = jk.validate(n)
    keep = n - d
    replicates = np.empty(jk.R)
    for r in range(jk.R):
        rng = _replicate_rng(jk.seed, r)
        idx = rng.choice(n, size=keep, replace=False)
        replicates[r] = estimate_slope(
            Sample(sample.x[idx], sample.y[idx]), estimator_config
        )
    lower, upper = np.quantile(replicates, [jk.alpha / 2.0, 1.0 - jk.alpha / 2.0])
    return float(lower), float(upper), replicates


def _walk_functionals(eps: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(terminal value, time integral, path) of random walks from increments.

    ``eps`` holds pre-scaled increments (one row per replication); the walk
    is their cumulative sum, the time integral its Riemann sum with step
    1/steps.
    """
    path = np.cumsum(eps, axis=1)
    terminal = path[:, -1]
    integral = path.sum(axis=1) / eps.shape[1]
    return terminal, integral, path


def simulate_prop1_ratio(cfg: BrownianSimConfig) -> np.ndarray:
    """Draws of the limit ratio (W(1) - 2*int W) / (B(1) - 2*int B).

    B and W are independent scaled random walks with increments of standard
    deviation 1/sqrt(steps), so the terminal variance is 1.
    """
    rng = np.random.default_rng(cfg.seed)
    scale = 1.0 / math.sqrt(cfg.steps)
    out = np.empty(cfg.reps)
    done = 0
    while done < cfg.reps:
        m = min(_SIM_BLOCK, cfg.reps - done)
        eps_b = rng.standard_normal((m, cfg.steps)) * scale
        eps_w = rng.standard_normal((m, cfg.steps)) * scale
        b1, int_b, _ = _walk_functionals(eps_b)
        w1, int_w, _ = _walk_functionals(eps_w)
        out[done : done + m] = (w1 - 2.0 * int_w) / (b1 - 2.0 * int_b)
        done += m
    return out


def simulate_prop2_null(cfg: BrownianSimConfig) -> np.ndarray:
    """Draws of the null law of the scaled covariance statistic.

    Each draw combines one pair of independent walks (B, W):

        B(1)W(1) + int B W dt - int B dW - int W dB - B(1)^2 * r

    with r the same functional ratio as :func:`simulate_prop1_ratio`,
    computed from the same pair of walks.  Stochastic integrals use
    left-point sums, time integrals Riemann sums.
    """
    rng = np.random.default_rng(cfg.seed)
    scale = 1.0 / math.sqrt(cfg.steps)
    out = np.empty(cfg.reps)
    done = 0
    while done < cfg.reps:
        m = min(_SIM_BLOCK, cfg.reps - done)
        eps_b = rng.standard_normal((m, cfg.steps)) * scale
        eps_w = rng.standard_normal((m, cfg.steps)) * scale
        b1, int_b, path_b = _walk_functionals(eps_b)
        w1, int_w, path_w = _walk_functionals(eps_w)
        int_bw = np.sum(path_b * path_w, axis=1) / cfg.steps
        prev_b = path_b - eps_b
        prev_w = path_w - eps_w
        ito_b_dw = np.sum(prev_b * eps_w, axis=1)
        ito_w_db = np.sum(prev_w * eps_b, axis=1)
        ratio = (w1 - 2.0 * int_w) / (b1 - 2.0 * int_b)
        out[done : done + m] = (
            b1 * w1 + int_bw - ito_b_dw - ito_w_db - b1 * b1 * ratio
        )
        done += m
    return out


def critical_values(
    draws: np.ndarray,
    alphas: list[float],
    source: str = "Prop2Statistic",
    config: BrownianSimConfig | None = None,
) -> CriticalValueTable:
    """Empirical two-sided critical values (alpha/2 and 1-alpha/2 quantiles)."""
    draws = np.asarray(draws, dtype=float)
    if draws.size == 0:
        raise ValueError("draws must be nonempty")
    rows = []
    for alpha in sorted(alphas):
        if not 0.0 < alpha < 0.5:
            raise ValueError(f"alpha must lie in (0, 0.5): {alpha}")
        lower, upper = np.quantile(draws, [alpha / 2.0, 1.0 - alpha / 2.0])
        rows.append((float(alpha), float(lower), float(upper)))
    return CriticalValueTable(rows=rows, source=source, config=config)
