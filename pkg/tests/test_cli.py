"""End-to-end tests for the command-line interface."""

import json

import numpy as np
import pytest

from pairslope.cli import (
    EXIT_DATA,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    DataError,
    main,
    parse_dataset,
)
from pairslope.core import Sample
from pairslope.multivariate import DesignMatrix


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def line_csv(tmp_path):
    # noiseless y = 2x - 1
    x = np.linspace(0.0, 5.0, 12)
    return write_csv(tmp_path / "line.csv", ["x", "y"], list(zip(x, 2.0 * x - 1.0)))


@pytest.fixture
def noisy_csv(tmp_path):
    rng = np.random.default_rng(3)
    x = rng.normal(5.0, 2.0, 150)
    y = 0.5 * x + rng.standard_normal(150)
    g = rng.normal(1.0, 0.1, 150)
    return write_csv(tmp_path / "noisy.csv", ["x", "y", "g"], list(zip(x, y, g)))


class TestParseDataset:
    def test_univariate(self, line_csv):
        sample = parse_dataset(line_csv, "y", ["x"])
        assert isinstance(sample, Sample) and sample.n == 12

    def test_multivariate(self, tmp_path):
        rng = np.random.default_rng(1)
        rows = [(a, b, a + b) for a, b in rng.normal(size=(10, 2))]
        path = write_csv(tmp_path / "m.csv", ["x1", "x2", "y"], rows)
        design = parse_dataset(path, "y", ["x1", "x2"])
        assert isinstance(design, DesignMatrix) and design.k == 2

    def test_missing_column(self, line_csv):
        with pytest.raises(DataError, match="'z'"):
            parse_dataset(line_csv, "y", ["z"])

    def test_nan_cell_reports_row(self, tmp_path):
        path = write_csv(tmp_path / "bad.csv", ["x", "y"], [(1, 2), ("NaN", 3), (2, 4)])
        with pytest.raises(DataError, match="rows: 3"):
            parse_dataset(path, "y", ["x"])

    def test_unparseable_cell_reports_row(self, tmp_path):
        path = write_csv(tmp_path / "bad.csv", ["x", "y"], [(1, 2), (2, "oops"), (3, 4)])
        with pytest.raises(DataError, match="rows: 3"):
            parse_dataset(path, "y", ["x"])

    def test_too_few_rows(self, tmp_path):
        path = write_csv(tmp_path / "tiny.csv", ["x", "y"], [(1, 2)])
        with pytest.raises(DataError, match="fewer than 2"):
            parse_dataset(path, "y", ["x"])

    def test_missing_file(self):
        with pytest.raises(DataError, match="cannot open"):
            parse_dataset("/nonexistent.csv", "y", ["x"])


class TestEstimateCommand:
    def test_noiseless_line(self, line_csv, capsys):
        code = main(
            ["estimate", "--data", line_csv, "--y", "y", "--x", "x",
             "--scheme", "full", "--weight", "absdx", "--method", "avg"]
        )
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["results"]["beta1_hat"] == pytest.approx(2.0)
        assert report["results"]["beta0_hat"] == pytest.approx(-1.0)
        assert report["command"] == "estimate"

    def test_multivariate_estimate(self, tmp_path, capsys):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(40, 2))
        y = 1.0 + 0.5 * X[:, 0] - 2.0 * X[:, 1]
        path = write_csv(
            tmp_path / "plane.csv", ["a", "b", "y"],
            [(X[i, 0], X[i, 1], y[i]) for i in range(40)],
        )
        code = main(["estimate", "--data", path, "--y", "y", "--x", "a", "b"])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        np.testing.assert_allclose(report["results"]["beta_hat"], [0.5, -2.0], atol=1e-8)

    def test_data_error_exit_code(self, line_csv):
        assert main(["estimate", "--data", line_csv, "--y", "nope", "--x", "x"]) == EXIT_DATA

    def test_numeric_error_exit_code(self, tmp_path):
        path = write_csv(tmp_path / "const.csv", ["x", "y"], [(1, 2), (1, 3), (1, 4)])
        assert main(["estimate", "--data", path, "--y", "y", "--x", "x"]) == EXIT_NUMERIC

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["estimate", "--weight", "bogus"])
        assert excinfo.value.code == EXIT_USAGE


class TestTestCommand:
    def test_residual_test(self, noisy_csv, capsys):
        code = main(
            ["test", "--data", noisy_csv, "--y", "y", "--x", "x", "--kind", "residual",
             "--null", "t"]
        )
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["results"]["test_kind"] == "residual"
        assert isinstance(report["results"]["reject"], bool)

    def test_brownian_null_requires_signed_weight(self, noisy_csv):
        code = main(
            ["test", "--data", noisy_csv, "--y", "y", "--x", "x", "--kind", "covariance",
             "--null", "brownian", "--weight", "absdx"]
        )
        assert code == EXIT_USAGE

    def test_covariance_jackknife(self, noisy_csv, capsys):
        code = main(
            ["test", "--data", noisy_csv, "--y", "y", "--x", "x", "--kind", "covariance",
             "--null", "jackknife", "--weight", "absdx", "--jk-reps", "120"]
        )
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["results"]["null_source"] == "jackknife"
        assert report["results"]["critical_values"] is not None


class TestJackknifeCommand:
    def test_noiseless_bounds_equal_slope(self, line_csv, capsys):
        code = main(
            ["jackknife", "--data", line_csv, "--y", "y", "--x", "x",
             "--d", "6", "--reps", "150"]
        )
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["results"]["lower"] == pytest.approx(2.0)
        assert report["results"]["upper"] == pytest.approx(2.0)

    def test_invalid_d(self, line_csv):
        code = main(
            ["jackknife", "--data", line_csv, "--y", "y", "--x", "x",
             "--d", "2", "--reps", "150"]
        )
        assert code == EXIT_NUMERIC


class TestSimulateCvCommand:
    def test_json_output(self, capsys):
        code = main(
            ["--seed", "5", "simulate-cv", "--prop", "2", "--steps", "200",
             "--reps", "2000", "--alphas", "0.10"]
        )
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        rows = report["results"]["rows"]
        assert rows[0]["alpha"] == 0.10
        assert rows[0]["lower"] < 0.0 < rows[0]["upper"]

    def test_csv_output(self, capsys):
        code = main(
            ["--seed", "5", "--out", "csv", "simulate-cv", "--prop", "1",
             "--steps", "200", "--reps", "2000", "--alphas", "0.05,0.10"]
        )
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "alpha,lower,upper" and len(lines) == 3

    def test_seed_reproducibility(self, capsys):
        args = ["--seed", "9", "simulate-cv", "--steps", "200", "--reps", "2000",
                "--alphas", "0.10"]
        main(args)
        first = json.loads(capsys.readouterr().out)["results"]
        main(args)
        second = json.loads(capsys.readouterr().out)["results"]
        assert first == second


class TestMonteCarloCommand:
    def test_runs_spec_file(self, tmp_path, capsys):
        spec = {
            "cells": [
                {
                    "beta0": 1.0, "beta1": 0.5,
                    "x_dist": {"kind": "uniform", "params": [-10, 10]},
                    "u_dist": {"kind": "normal", "params": [0, 1]},
                    "rho": 0.0, "n": 60, "seed": 2,
                }
            ],
            "estimator": {"scheme": "adjacent", "weight": "absdx", "method": "avg"},
            "target": "estimator",
            "reps": 150,
        }
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(spec))
        code = main(["montecarlo", "--spec", str(path)])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["results"]["rows"][0]["mean"] == pytest.approx(0.5, abs=0.1)

    def test_text_output(self, tmp_path, capsys):
        spec = {
            "cells": [{"x_dist": {"kind": "uniform", "params": [-5, 5]},
                       "u_dist": {"kind": "normal", "params": [0, 1]},
                       "n": 50, "seed": 1}],
            "reps": 120,
        }
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(spec))
        code = main(["--out", "text", "montecarlo", "--spec", str(path)])
        assert code == EXIT_OK
        assert "Exogen" in capsys.readouterr().out

    def test_missing_spec(self):
        assert main(["montecarlo", "--spec", "/nonexistent.json"]) == EXIT_DATA


class TestIvScreenCommand:
    def test_ranking_output(self, noisy_csv, capsys):
        code = main(
            ["iv-screen", "--data", noisy_csv, "--y", "y", "--x", "x",
             "--candidates", "g"]
        )
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        ranking = report["results"]["ranking"]
        assert {e["label"] for e in ranking} == {"original", "g"}
        assert sum(e["selected"] for e in ranking) == 1


class TestRoundTrip:
    def test_estimate_reproducible_from_report(self, noisy_csv, capsys):
        args = ["estimate", "--data", noisy_csv, "--y", "y", "--x", "x",
                "--scheme", "full", "--weight", "absdx"]
        main(args)
        first = json.loads(capsys.readouterr().out)
        main(args)
        second = json.loads(capsys.readouterr().out)
        assert first["results"] == second["results"]
        assert first["config"] == second["config"]
