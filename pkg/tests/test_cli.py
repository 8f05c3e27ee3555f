"""
Tests for the command-line interface.
"""

import contextlib
import io
import json
import math
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, Audit, build_parser, main, resolve_config
from src.linalg_core import matrix_to_json
from src.measurement.scheme import ConsistencyError
from src.quantum_types import PAULI, DensityOperator

I2 = PAULI["identity"]


def run_cli(argv):
    stdout = io.StringIO()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(io.StringIO()):
        code = main(argv)
    return code, stdout.getvalue()


class TestArguments(unittest.TestCase):

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_invalid_trials_is_usage_error(self):
        self.assertEqual(run_cli(["random-sweep", "--trials", "0"])[0], EXIT_USAGE)

    def test_unknown_subcommand(self):
        self.assertEqual(run_cli(["sweep-everything"])[0], EXIT_USAGE)

    def test_version(self):
        self.assertEqual(run_cli(["--version"])[0], EXIT_OK)

    def test_flags_override_config_file(self):
        config_file = self.temp_dir / "sweep.json"
        config_file.write_text(json.dumps({"trials": 30, "seed": 5, "workers": 2}))
        args = build_parser().parse_args(["random-sweep", "--config", str(config_file), "--trials", "4"])
        config = resolve_config(args, default_trials=1000)
        self.assertEqual((config.trials, config.master_seed, config.workers), (4, 5, 2))

    def test_subcommand_default_trials(self):
        args = build_parser().parse_args(["qubit-tradeoff", "--seed", "1"])
        self.assertEqual(resolve_config(args, default_trials=100).trials, 100)

    def test_bad_config_file_is_usage_error(self):
        config_file = self.temp_dir / "sweep.json"
        config_file.write_text(json.dumps({"trials": 3, "dim_range": [2, 6]}))
        code, _ = run_cli(["random-sweep", "--config", str(config_file), "--out", str(self.temp_dir / "out")])
        self.assertEqual(code, EXIT_USAGE)

    def test_ndr_rejects_observable_without_spread(self):
        out = self.temp_dir / "ndr"
        code, _ = run_cli(["ndr", "--trials", "1", "--b", "sigma_y", "--out", str(out)])
        self.assertEqual(code, EXIT_USAGE)
        config_file = self.temp_dir / "ndr.json"
        config_file.write_text(json.dumps({"trials": 1, "observable_b": "sigma_y"}))
        self.assertEqual(run_cli(["ndr", "--config", str(config_file), "--out", str(out)])[0], EXIT_USAGE)
        self.assertFalse((out / "ndr.csv").exists())


class TestRandomSweepCommand(unittest.TestCase):

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def _run(self, out, *extra):
        return run_cli(["random-sweep", "--trials", "5", "--seed", "3", "--out", str(out), "-q", *extra])

    def test_outputs(self):
        out = self.temp_dir / "run"
        code, stdout = self._run(out, "--dump")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("random-sweep: 5 trials", stdout)
        header = (out / "random_sweep.csv").read_text(encoding="utf-8").splitlines()[0]
        self.assertEqual(header, "trial,d_S,d_P,seed,cv2,xi,noise_ratio,lhs,rhs,residual,status,satisfied")
        table = pd.read_csv(out / "random_sweep.csv")
        self.assertEqual(list(table["trial"]), [0, 1, 2, 3, 4])

        manifest = json.loads((out / "run_manifest.json").read_text(encoding="utf-8"))
        self.assertEqual(manifest["subcommand"], "random-sweep")
        self.assertEqual(manifest["master_seed"], 3)
        self.assertIn("random_sweep.csv", manifest["outputs"])
        self.assertEqual(manifest["summary"]["violations"], [])
        self.assertTrue(any(p.startswith("schemes/trial_") for p in manifest["outputs"]))

    def test_reruns_are_byte_identical(self):
        self._run(self.temp_dir / "a")
        self._run(self.temp_dir / "b")
        for name in ("random_sweep.csv", "random_sweep_plot.csv", "random_sweep_reference.csv"):
            self.assertEqual((self.temp_dir / "a" / name).read_bytes(), (self.temp_dir / "b" / name).read_bytes())

    def test_json_format(self):
        out = self.temp_dir / "json"
        self.assertEqual(self._run(out, "--format", "json")[0], EXIT_OK)
        data = json.loads((out / "random_sweep.json").read_text(encoding="utf-8"))
        self.assertEqual(len(data["records"]), 5)


class TestVerifyCommand(unittest.TestCase):

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())
        self.state_file = self._write("state.json", DensityOperator(0.5 * (I2 + PAULI["sigma_y"])).to_json())

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def _write(self, name, data):
        path = self.temp_dir / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    def _scheme(self, unitary, meter):
        return self._write("scheme.json", {
            "d_S": 2, "d_P": 2,
            "U": matrix_to_json(unitary),
            "M": matrix_to_json(meter),
            "rho_P": matrix_to_json(np.diag([1.0, 0.0])),
        })

    def test_identity_scheme_is_unbounded(self):
        scheme_file = self._scheme(np.eye(4), np.kron(PAULI["sigma_z"] + I2, I2))
        code, stdout = run_cli(["verify", str(scheme_file), str(self.state_file)])
        self.assertEqual(code, EXIT_OK)
        self.assertIn("Xi=unbounded", stdout)
        self.assertIn("[PASS] Kraus completeness", stdout)
        self.assertNotIn("[FAIL]", stdout)

    def test_controlled_rotation_scheme(self):
        c, s = np.cos(np.pi / 6), np.sin(np.pi / 6)
        unitary = np.block([[I2, np.zeros((2, 2))], [np.zeros((2, 2)), np.array([[c, -s], [s, c]])]])
        scheme_file = self._scheme(unitary, np.kron(I2, np.diag([0.0, 2.0])))
        code, stdout = run_cli(["verify", str(scheme_file), str(self.state_file)])
        self.assertEqual(code, EXIT_OK)
        line = next(line for line in stdout.splitlines() if "trade-off bound" in line)
        xi = float(line.split("Xi=")[1].split()[0])
        self.assertAlmostEqual(xi, 1 / 6, places=10)
        floor_line = next(line for line in stdout.splitlines() if "noise floor" in line)
        self.assertIn("[PASS]", floor_line)
        self.assertAlmostEqual(float(floor_line.split("floor=")[1]), math.sqrt(5.0), places=10)

    def test_biased_observable_fails(self):
        scheme_file = self._scheme(np.eye(4), np.kron(PAULI["sigma_z"] + I2, I2))
        observable = matrix_to_json(PAULI["sigma_z"])
        observable["kind"] = "observable"
        code, stdout = run_cli(["verify", str(scheme_file), str(self.state_file),
                                "--observable", str(self._write("obs.json", observable))])
        self.assertEqual(code, EXIT_FAILURE)
        self.assertIn("[FAIL] unbiasedness", stdout)

    def test_bad_state_trace_is_usage_error(self):
        scheme_file = self._scheme(np.eye(4), np.kron(PAULI["sigma_z"] + I2, I2))
        bad_state = self._write("bad_state.json", matrix_to_json(np.eye(2)))
        self.assertEqual(run_cli(["verify", str(scheme_file), str(bad_state)])[0], EXIT_USAGE)

    def test_missing_scheme_file(self):
        code, _ = run_cli(["verify", str(self.temp_dir / "nope.json"), str(self.state_file)])
        self.assertEqual(code, EXIT_USAGE)

    def test_state_dimension_mismatch(self):
        scheme_file = self._scheme(np.eye(4), np.kron(PAULI["sigma_z"] + I2, I2))
        state = self._write("qutrit.json", DensityOperator.maximally_mixed(3).to_json())
        self.assertEqual(run_cli(["verify", str(scheme_file), str(state)])[0], EXIT_USAGE)


class TestAudit(unittest.TestCase):

    def test_consistency_error_names_the_identity(self):
        audit = Audit()

        def failing():
            raise ConsistencyError("purified meter mean", "residual too large")

        audit.run("purification", failing)
        audit.add("unbiasedness", True, "residual 0")
        self.assertFalse(audit.passed)
        self.assertEqual(audit.failures(), ["purified meter mean"])
        self.assertIn("[PASS] unbiasedness: residual 0", audit.render())


@pytest.mark.slow
def test_ndr_noise_floors():
    temp_dir = Path(tempfile.mkdtemp())
    try:
        code, stdout = run_cli(["ndr", "--trials", "1", "--seed", "9", "--xi", "2", "--xi", "1",
                                "--out", str(temp_dir), "-q"])
        assert code == EXIT_OK
        floors = pd.read_csv(temp_dir / "ndr_noise_floors.csv")
        assert list(floors.columns) == ["xi", "noise_floor"]
        assert abs(floors["noise_floor"][0] - 1.0) <= 1e-12
        assert abs(floors["noise_floor"][1] - math.sqrt(3.0)) <= 1e-12
        assert "noise floor at xi=2" in stdout
        assert (temp_dir / "ndr_frontier.csv").is_file()
    finally:
        shutil.rmtree(temp_dir)


@pytest.mark.slow
def test_qubit_tradeoff_command():
    temp_dir = Path(tempfile.mkdtemp())
    try:
        code, _ = run_cli(["qubit-tradeoff", "--trials", "2", "--seed", "4", "--out", str(temp_dir), "-q", "--dump"])
        assert code == EXIT_OK
        table = pd.read_csv(temp_dir / "qubit_tradeoff.csv")
        assert list(table.columns) == ["trial", "residual", "xi", "one_plus_noise_ratio", "cv2", "satisfied"]
        assert len(table) == 2
        assert (temp_dir / "schemes" / "observable.json").is_file()
    finally:
        shutil.rmtree(temp_dir)


@pytest.mark.slow
def test_qubit_and_ndr_reruns_are_byte_identical():
    temp_dir = Path(tempfile.mkdtemp())
    try:
        for command, extra in (("qubit-tradeoff", []), ("ndr", ["--b", "sigma_z", "--xi", "2"])):
            outputs = []
            for run in ("a", "b"):
                out = temp_dir / command / run
                argv = [command, "--trials", "1", "--seed", "6", "--out", str(out), "-q", "--dump", *extra]
                code, _ = run_cli(argv)
                assert code == EXIT_OK
                outputs.append({p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*"))
                                if p.is_file() and p.name != "run_manifest.json"})
            assert outputs[0] == outputs[1]
            assert any(p.suffix == ".csv" for p in outputs[0])
    finally:
        shutil.rmtree(temp_dir)


if __name__ == '__main__':
    unittest.main()
