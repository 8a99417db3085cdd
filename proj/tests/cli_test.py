"""End-to-end checks of the genheck command-line tool.

Usage: cli_test.py <genheck executable> <source dir>
"""

import csv
import io
import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

CLI = None
SRC = None


def run(*args, env=None, check=None):
    full_env = dict(os.environ)
    full_env.pop("GENHECK_THREADS", None)
    if env:
        full_env.update(env)
    proc = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, env=full_env)
    if check is not None and proc.returncode != check:
        raise AssertionError(
            f"{args}: exit {proc.returncode}, expected {check}\nstderr:\n{proc.stderr}")
    return proc


def schema(name):
    return json.loads((SRC / "schemas" / f"{name}.schema.json").read_text())


def fixture_args():
    return ["--config", SRC / "data" / "meps_ghm.json", "--data", SRC / "data" / "meps_fixture.csv"]


class FitCommand(unittest.TestCase):
    def test_fixture_report_matches_schema(self):
        proc = run("fit", *fixture_args(), check=0)
        report = json.loads(proc.stdout)
        jsonschema.validate(report, schema("fit_report"))
        self.assertTrue(report["converged"])
        self.assertEqual(report["n"], 200)
        self.assertEqual(report["n_selected"], 176)
        self.assertEqual(len(report["coefficients"]), 22)
        self.assertEqual(report["coefficients"][-1]["equation"], "correlation")
        self.assertIn("read 200 rows (24 censored)", proc.stderr)
        self.assertTrue(proc.stderr.startswith("genheck fit "))

    def test_classic_model(self):
        report = json.loads(run("fit", *fixture_args(), "--model", "classic", check=0).stdout)
        jsonschema.validate(report, schema("fit_report"))
        self.assertEqual(report["model"], "classic")
        self.assertEqual(len(report["coefficients"]), 17)

    def test_iteration_limit_exits_2_with_report(self):
        proc = run("fit", *fixture_args(), "--max-iter", "1", check=2)
        report = json.loads(proc.stdout)
        jsonschema.validate(report, schema("fit_report"))
        self.assertFalse(report["converged"])
        self.assertEqual(report["status"], "NonConvergence")
        self.assertIsNone(report["coefficients"][0]["std_error"])

    def test_writes_to_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "fit.json"
            run("fit", *fixture_args(), "--out", out, check=0)
            jsonschema.validate(json.loads(out.read_text()), schema("fit_report"))


class InputErrors(unittest.TestCase):
    def test_empty_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            empty = Path(tmp) / "empty.csv"
            empty.write_text("")
            proc = run("fit", "--config", SRC / "data" / "meps_ghm.json", "--data", empty, check=1)
            self.assertIn("empty", proc.stderr)

    def test_missing_column(self):
        proc = run("fit", *fixture_args(), "--outcome-covariates", "age,nope", check=1)
        self.assertIn("nope", proc.stderr)

    def test_malformed_value_names_row(self):
        with tempfile.TemporaryDirectory() as tmp:
            bad = Path(tmp) / "bad.csv"
            lines = (SRC / "data" / "meps_fixture.csv").read_text().splitlines()
            fields = lines[7].split(",")
            fields[3] = "abc"
            lines[7] = ",".join(fields)
            bad.write_text("\n".join(lines) + "\n")
            proc = run("fit", "--config", SRC / "data" / "meps_ghm.json", "--data", bad, check=1)
            self.assertIn("row 7", proc.stderr)

    def test_missing_file_and_bad_usage(self):
        run("fit", "--config", SRC / "data" / "meps_ghm.json", "--data", "/no/such.csv", check=1)
        run("bogus", check=1)
        run("simulate", "--scenario", "9", check=1)


class TestCommand(unittest.TestCase):
    def test_correlation_restriction(self):
        proc = run("test", *fixture_args(), check=0)
        report = json.loads(proc.stdout)
        jsonschema.validate(report, schema("test_report"))
        self.assertEqual(report["restriction"]["equation"], "correlation")
        self.assertEqual(report["df"], 3)
        self.assertEqual([t["test"] for t in report["tests"]], ["LR", "Wald", "Gradient"])
        lr = report["tests"][0]["statistic"]
        self.assertAlmostEqual(lr, 2 * (report["loglik_full"] - report["loglik_restricted"]),
                               places=9)

    def test_named_columns(self):
        report = json.loads(run("test", *fixture_args(), "--restrict", "selection:income",
                                check=0).stdout)
        jsonschema.validate(report, schema("test_report"))
        self.assertEqual(report["restriction"]["coefficients"], ["income"])
        self.assertEqual(report["df"], 1)
        run("test", *fixture_args(), "--restrict", "selection:nope", check=1)


class DiagnosticCommands(unittest.TestCase):
    def test_residuals(self):
        out = run("residuals", *fixture_args(), check=0).stdout
        rows = list(csv.DictReader(io.StringIO(out)))
        self.assertEqual(len(rows), 200)
        self.assertEqual(list(rows[0]), ["index", "u", "ordinary", "standardized", "all_obs"])
        self.assertEqual(rows[0]["index"], "1")
        for r in rows:
            if r["u"] == "0":
                self.assertEqual(r["ordinary"], "NA")
                self.assertEqual(float(r["all_obs"]), 0.0)

    def test_envelope_is_deterministic(self):
        with tempfile.TemporaryDirectory() as tmp:
            data = Path(tmp) / "sim.csv"
            data.write_text(run("simulate", "--scenario", "1", "--n", "200", "--seed", "6",
                                check=0).stdout)
            args = ["envelope", "--data", data, "--outcome", "y", "--selection", "u",
                    "--outcome-covariates", "x1,x2", "--selection-covariates", "x1,x2,x3",
                    "--dispersion-covariates", "x1", "--correlation-covariates", "x1",
                    "--n-sim", "19", "--seed", "3"]
            a = run(*args, check=0).stdout
            b = run(*args, "--threads", "2", check=0).stdout
        self.assertEqual(a, b)
        rows = list(csv.DictReader(io.StringIO(a)))
        self.assertEqual(len(rows), 200)
        for r in rows:
            self.assertLessEqual(float(r["lower"]), float(r["upper"]))

    def test_cook_rows(self):
        out = run("cook", *fixture_args(), "--rows", "1,2,3", check=0).stdout
        rows = list(csv.DictReader(io.StringIO(out)))
        self.assertEqual([r["index"] for r in rows], ["1", "2", "3"])
        self.assertAlmostEqual(float(rows[0]["threshold"]), 2 * 22 / 200)


class SimulationCommands(unittest.TestCase):
    def test_simulate_then_fit_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            data = Path(tmp) / "sim.csv"
            with open(data, "w") as fh:
                fh.write(run("simulate", "--scenario", "1", "--n", "800", "--seed", "4",
                             check=0).stdout)
            proc = run("fit", "--data", data, "--outcome", "y", "--selection", "u",
                       "--outcome-covariates", "x1,x2", "--selection-covariates", "x1,x2,x3",
                       "--dispersion-covariates", "x1", "--correlation-covariates", "x1", check=0)
            report = json.loads(proc.stdout)
            truth = [1.1, 0.7, 0.1, 0.9, 0.5, 1.1, 0.6, -0.4, 0.7, 0.3, 0.5]
            for coef, value in zip(report["coefficients"], truth):
                self.assertLess(abs(coef["estimate"] - value), 4.5 * coef["std_error"], coef)

    def test_simulate_is_seeded(self):
        a = run("simulate", "--scenario", "3", "--n", "50", "--seed", "8", check=0).stdout
        b = run("simulate", "--scenario", "3", "--n", "50", "--seed", "8", check=0).stdout
        c = run("simulate", "--scenario", "3", "--n", "50", "--seed", "9", check=0).stdout
        self.assertEqual(a, b)
        self.assertNotEqual(a, c)

    def test_mc_report_and_thread_invariance(self):
        with tempfile.TemporaryDirectory() as tmp:
            args = ["mc", "--scenario", "1", "--n", "300", "--reps", "8", "--seed", "5",
                    "--tests", "0.05,0.1"]
            run(*args, "--out", Path(tmp) / "a", check=0)
            run(*args, "--out", Path(tmp) / "b", env={"GENHECK_THREADS": "2"}, check=0)
            for suffix in ("_parameters.csv", "_tests.csv", ".json"):
                self.assertEqual((Path(tmp) / f"a{suffix}").read_bytes(),
                                 (Path(tmp) / f"b{suffix}").read_bytes(), suffix)
            report = json.loads((Path(tmp) / "a.json").read_text())
            jsonschema.validate(report, schema("mc_report"))
            params = list(csv.DictReader(io.StringIO((Path(tmp) / "a_parameters.csv").read_text())))
            self.assertEqual(len(params), 11)
            tests = list(csv.DictReader(io.StringIO((Path(tmp) / "a_tests.csv").read_text())))
            self.assertEqual(len(tests), 6)

    def test_mc_stdout(self):
        out = run("mc", "--scenario", "5", "--n", "300", "--reps", "3", "--model", "classic",
                  check=0).stdout
        self.assertTrue(out.startswith("parameter,true,mean,rmse\n"))


if __name__ == "__main__":
    CLI = os.path.abspath(sys.argv[1])
    SRC = Path(sys.argv[2]).resolve()
    unittest.main(argv=[sys.argv[0], "-v"])
