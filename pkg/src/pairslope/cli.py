"""Command-line interface: dataset ingestion, estimation, testing, simulation.

Every run emits a machine-readable report embedding the resolved
configuration and seed, so any published number can be regenerated from the
report alone.  Exit codes: 0 success, 2 usage error, 3 data error,
4 numeric/degeneracy error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .core import (
    DegenerateSampleError,
    EstimatorConfig,
    Method,
    PairKind,
    PairScheme,
    Sample,
    WeightKind,
    ZeroWeightSumError,
    fit,
)
from .endogeneity import (
    NullSource,
    covariance_test,
    iv_screening,
    residual_mean_test,
)
from .inference import (
    BrownianSimConfig,
    JackknifeConfig,
    critical_values,
    jackknife_ci,
    simulate_prop1_ratio,
    simulate_prop2_null,
)
from .montecarlo import load_experiment, run_experiment
from .multivariate import DesignMatrix, fit_multivariate

__all__ = ["main", "parse_dataset", "DataError", "RunReport"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class DataError(Exception):
    """Dataset file missing, malformed, or columns unusable."""


@dataclass
class RunReport:
    """Reproducible record of one CLI invocation."""

    command: str
    config: dict
    results: dict
    seed: int | None
    elapsed_seconds: float
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return dataclasses.asdict(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def parse_dataset(path: str, y_col: str, x_cols: list[str]):
    """Load a headered CSV into a Sample (one regressor) or DesignMatrix.

    Rows containing a non-finite or unparseable value in any selected
    column are reported by row number.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open dataset: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError("dataset has no header row")
        for col in [y_col, *x_cols]:
            if col not in reader.fieldnames:
                raise DataError(f"column {col!r} not found in dataset header")
        ys: list[float] = []
        xs: list[list[float]] = []
        bad_rows: list[int] = []
        for row_number, row in enumerate(reader, start=2):
            try:
                yv = float(row[y_col])
                xv = [float(row[c]) for c in x_cols]
            except (TypeError, ValueError):
                bad_rows.append(row_number)
                continue
            if not (math.isfinite(yv) and all(math.isfinite(v) for v in xv)):
                bad_rows.append(row_number)
                continue
            ys.append(yv)
            xs.append(xv)
    if bad_rows:
        shown = ", ".join(map(str, bad_rows[:10]))
        raise DataError(f"non-finite or unparseable values in rows: {shown}")
    if len(ys) < 2:
        raise DataError("dataset has fewer than 2 valid rows")
    if len(x_cols) == 1:
        return Sample(np.array([r[0] for r in xs]), np.array(ys))
    return DesignMatrix(np.array(xs), np.array(ys))


def _estimator_config(args: argparse.Namespace) -> EstimatorConfig:
    return EstimatorConfig(
        scheme=PairScheme(PairKind(args.scheme), sorted=args.sorted),
        weight=WeightKind(args.weight),
        method=Method(args.method),
        intercept="zero" if getattr(args, "no_intercept", False) else "means",
    )


def _add_estimator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scheme", choices=["adjacent", "full"], default="full")
    parser.add_argument("--sorted", action="store_true")
    parser.add_argument(
        "--weight", choices=["dx", "absdx", "euclid", "sqrtabsdx"], default="absdx"
    )
    parser.add_argument("--method", choices=["avg", "loss"], default="avg")
    parser.add_argument("--no-intercept", action="store_true")


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="CSV file with header row")
    parser.add_argument("--y", required=True, help="response column name")
    parser.add_argument(
        "--x", required=True, nargs="+", help="regressor column name(s)"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairslope",
        description="Pairwise-slope regression estimators, endogeneity tests and simulators",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", choices=["json", "csv", "text"], default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="fit the pairwise estimator to a dataset")
    _add_data_flags(p)
    _add_estimator_flags(p)

    p = sub.add_parser("test", help="run an endogeneity test")
    _add_data_flags(p)
    _add_estimator_flags(p)
    p.add_argument("--kind", choices=["residual", "covariance"], default="covariance")
    p.add_argument("--null", choices=["t", "brownian", "jackknife"], default="brownian")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--sim-steps", type=int, default=2000)
    p.add_argument("--sim-reps", type=int, default=20000)
    p.add_argument("--jk-reps", type=int, default=200)

    p = sub.add_parser("jackknife", help="delete-d jackknife interval for the slope")
    _add_data_flags(p)
    _add_estimator_flags(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--reps", type=int, default=10000)
    p.add_argument("--alpha", type=float, default=0.05)

    p = sub.add_parser("simulate-cv", help="simulate limit-law critical values")
    p.add_argument("--prop", type=int, choices=[1, 2], default=2)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--reps", type=int, default=50000)
    p.add_argument("--alphas", default="0.01,0.05,0.10")

    p = sub.add_parser("montecarlo", help="run a declarative Monte Carlo experiment")
    p.add_argument("--spec", required=True, help="JSON or TOML experiment file")

    p = sub.add_parser("iv-screen", help="rank candidate instrument columns")
    _add_data_flags(p)
    _add_estimator_flags(p)
    p.add_argument(
        "--candidates", required=True, nargs="+", help="candidate column name(s)"
    )
    return parser


def _cmd_estimate(args) -> tuple[dict, dict]:
    config = _estimator_config(args)
    data = parse_dataset(args.data, args.y, args.x)
    if isinstance(data, Sample):
        result = fit(data, config)
        results = {
            "beta0_hat": result.beta0_hat,
            "beta1_hat": result.beta1_hat,
            "n": result.n,
            "dropped_pairs": result.dropped_pairs,
        }
    else:
        result = fit_multivariate(data, config)
        results = {
            "beta0_hat": result.beta0_hat,
            "beta_hat": result.beta_hat.tolist(),
            "n": data.n,
        }
    return {"estimator": dataclasses.asdict(config)}, results


def _cmd_test(args) -> tuple[dict, dict]:
    config = _estimator_config(args)
    data = parse_dataset(args.data, args.y, args.x)
    if not isinstance(data, Sample):
        raise DataError("tests require exactly one regressor column")
    if args.kind == "residual":
        if args.null != "t":
            raise UsageError("the residual test uses the analytic t null (--null t)")
        config = dataclasses.replace(config, intercept="zero")
        report = residual_mean_test(fit(data, config), alpha=args.alpha)
    else:
        null_source = NullSource(args.null)
        if null_source is NullSource.ANALYTIC_T:
            raise UsageError("the covariance test needs --null brownian or jackknife")
        if null_source is NullSource.SIMULATED_BROWNIAN and args.weight != "dx":
            raise UsageError(
                "the simulated Brownian null is derived only for the signed-"
                "difference weighting (--weight dx); the limit law for other "
                "weights is unknown, use --null jackknife"
            )
        report = covariance_test(
            data,
            config,
            alpha=args.alpha,
            null_source=null_source,
            sim_config=BrownianSimConfig(
                steps=args.sim_steps, reps=args.sim_reps, seed=args.seed
            ),
            jk=JackknifeConfig(R=args.jk_reps, alpha=args.alpha, seed=args.seed),
        )
    return (
        {"estimator": dataclasses.asdict(config), "alpha": args.alpha, "null": args.null},
        dataclasses.asdict(report),
    )


def _cmd_jackknife(args) -> tuple[dict, dict]:
    config = _estimator_config(args)
    data = parse_dataset(args.data, args.y, args.x)
    if not isinstance(data, Sample):
        raise DataError("jackknife supports exactly one regressor column")
    jk = JackknifeConfig(d=args.d, R=args.reps, alpha=args.alpha, seed=args.seed)
    lower, upper, replicates = jackknife_ci(data, config, jk)
    return (
        {
            "estimator": dataclasses.asdict(config),
            "d": jk.resolve_d(data.n),
            "R": jk.R,
            "alpha": jk.alpha,
        },
        {
            "lower": lower,
            "upper": upper,
            "replicate_mean": float(np.mean(replicates)),
            "replicate_sd": float(np.std(replicates, ddof=1)),
        },
    )


def _cmd_simulate_cv(args) -> tuple[dict, dict, str]:
    alphas = [float(a) for a in args.alphas.split(",") if a]
    cfg = BrownianSimConfig(steps=args.steps, reps=args.reps, seed=args.seed)
    if args.prop == 1:
        draws = simulate_prop1_ratio(cfg)
        source = "Prop1Ratio"
    else:
        draws = simulate_prop2_null(cfg)
        source = "Prop2Statistic"
    table = critical_values(draws, alphas, source=source, config=cfg)
    results = {
        "source": source,
        "rows": [{"alpha": a, "lower": lo, "upper": up} for a, lo, up in table.rows],
    }
    return {"sim": dataclasses.asdict(cfg), "alphas": alphas}, results, table.to_csv()


def _cmd_montecarlo(args) -> tuple[dict, dict, str, str]:
    try:
        cells, config, target, reps = load_experiment(args.spec)
    except OSError as exc:
        raise DataError(f"cannot open experiment spec: {exc}") from exc
    except (KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"malformed experiment spec: {exc}") from exc
    table = run_experiment(cells, config, target, reps)
    results = {
        "target": target.value,
        "rows": [dataclasses.asdict(r) for r in table.rows],
    }
    cfg = {
        "spec_file": args.spec,
        "estimator": dataclasses.asdict(config),
        "reps": reps,
    }
    return cfg, results, table.to_csv(), table.to_text()


def _cmd_iv_screen(args) -> tuple[dict, dict]:
    config = _estimator_config(args)
    data = parse_dataset(args.data, args.y, args.x)
    if not isinstance(data, Sample):
        raise DataError("iv-screen supports exactly one regressor column")
    candidates = []
    for col in args.candidates:
        cand = parse_dataset(args.data, col, args.x)
        candidates.append(cand.y)
    ranking = iv_screening(data, candidates, config=config, labels=args.candidates)
    return (
        {"estimator": dataclasses.asdict(config), "candidates": args.candidates},
        {"ranking": [dataclasses.asdict(e) for e in ranking]},
    )


class UsageError(Exception):
    """Invalid flag combination."""


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    start = time.monotonic()
    csv_text = None
    plain_text = None
    try:
        if args.command == "estimate":
            config, results = _cmd_estimate(args)
        elif args.command == "test":
            config, results = _cmd_test(args)
        elif args.command == "jackknife":
            config, results = _cmd_jackknife(args)
        elif args.command == "simulate-cv":
            config, results, csv_text = _cmd_simulate_cv(args)
        elif args.command == "montecarlo":
            config, results, csv_text, plain_text = _cmd_montecarlo(args)
        else:
            config, results = _cmd_iv_screen(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DegenerateSampleError, ZeroWeightSumError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    report = RunReport(
        command=args.command,
        config={**config, "seed": args.seed, "threads": args.threads},
        results=results,
        seed=args.seed,
        elapsed_seconds=time.monotonic() - start,
    )
    if args.out == "csv" and csv_text is not None:
        sys.stdout.write(csv_text)
    elif args.out == "text" and plain_text is not None:
        sys.stdout.write(plain_text)
    else:
        print(report.to_json())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
