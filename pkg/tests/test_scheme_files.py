"""
Unit tests for loading and dumping scheme files.
"""

import json
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.linalg_core import matrix_to_json
from src.measurement.scheme import MeasurementScheme, derive_unbiased_observable
from src.quantum_types import PAULI, DensityOperator, Observable, UnitaryOperator
from src.result_writer import ResultWriter
from src.scheme_files import SchemaError, SchemeFileLoader, dump_scheme, parse_scheme

I2 = PAULI["identity"]


def identity_scheme_document():
    return {
        "d_S": 2,
        "d_P": 2,
        "U": matrix_to_json(np.eye(4)),
        "M": matrix_to_json(np.kron(PAULI["sigma_z"] + I2, I2)),
        "rho_P": matrix_to_json(np.diag([1.0, 0.0])),
        "metadata": {"name": "identity"},
    }


class TestSchemeFileLoader(unittest.TestCase):
    """Test cases for SchemeFileLoader."""

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())
        self.loader = SchemeFileLoader()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def _write(self, name, data):
        path = self.temp_dir / name
        path.write_text(data if isinstance(data, str) else json.dumps(data), encoding="utf-8")
        return path

    def test_validate_missing_file(self):
        with self.assertRaisesRegex(SchemaError, "file not found"):
            self.loader.validate_file(self.temp_dir / "missing.json")

    def test_validate_directory(self):
        with self.assertRaisesRegex(SchemaError, "not a file"):
            self.loader.validate_file(self.temp_dir)

    def test_validate_extension(self):
        path = self._write("scheme.txt", "{}")
        with self.assertRaisesRegex(SchemaError, "expected .json"):
            self.loader.validate_file(path)

    def test_invalid_json(self):
        path = self._write("scheme.json", "{broken")
        with self.assertRaises(SchemaError) as ctx:
            self.loader.load_scheme(path)
        self.assertEqual(ctx.exception.path, "$")

    def test_load_scheme(self):
        scheme = self.loader.load_scheme(self._write("scheme.json", identity_scheme_document()))
        self.assertEqual(scheme.dims, (2, 2))
        np.testing.assert_allclose(derive_unbiased_observable(scheme).matrix, PAULI["sigma_z"] + I2, atol=1e-15)

    def test_load_state_and_observable(self):
        state = self.loader.load_state(self._write("state.json", DensityOperator.maximally_mixed(2).to_json()))
        self.assertEqual(state.dim, 2)
        observable_doc = matrix_to_json(PAULI["sigma_x"])
        observable_doc["kind"] = "observable"
        observable = self.loader.load_observable(self._write("obs.json", observable_doc))
        np.testing.assert_allclose(observable.eigenvalues, [-1.0, 1.0], atol=1e-12)

    def test_state_kind_mismatch(self):
        doc = matrix_to_json(np.eye(2) / 2)
        doc["kind"] = "observable"
        with self.assertRaises(SchemaError) as ctx:
            self.loader.load_state(self._write("state.json", doc))
        self.assertEqual(ctx.exception.path, "kind")

    def test_bad_state_trace(self):
        with self.assertRaisesRegex(SchemaError, "trace"):
            self.loader.load_state(self._write("state.json", matrix_to_json(np.eye(2))))


class TestParseScheme(unittest.TestCase):
    """Field-level validation of scheme documents."""

    def assert_schema_error(self, data, path, fragment=None):
        with self.assertRaises(SchemaError) as ctx:
            parse_scheme(data)
        self.assertEqual(ctx.exception.path, path)
        if fragment:
            self.assertIn(fragment, str(ctx.exception))

    def test_missing_field(self):
        data = identity_scheme_document()
        del data["M"]
        self.assert_schema_error(data, "M", "missing field")

    def test_bad_dimension_value(self):
        data = identity_scheme_document()
        data["d_S"] = 0
        self.assert_schema_error(data, "d_S", "positive integer")

    def test_rho_p_trace(self):
        data = identity_scheme_document()
        data["rho_P"] = matrix_to_json(np.eye(2))
        self.assert_schema_error(data, "rho_P", "trace")

    def test_non_unitary(self):
        data = identity_scheme_document()
        data["U"] = matrix_to_json(2 * np.eye(4))
        self.assert_schema_error(data, "U", "unitary")

    def test_dimension_mismatch(self):
        data = identity_scheme_document()
        data["d_P"] = 3
        self.assert_schema_error(data, "U", "d_S*d_P=6")

    def test_meter_must_be_zero_grounded(self):
        data = identity_scheme_document()
        data["M"] = matrix_to_json(np.kron(PAULI["sigma_z"], I2))
        self.assert_schema_error(data, "M", "minimum eigenvalue")

    def test_metadata_must_be_object(self):
        data = identity_scheme_document()
        data["metadata"] = "identity"
        self.assert_schema_error(data, "metadata")

    def test_non_orthonormal_probe_basis(self):
        data = identity_scheme_document()
        data["probe_basis"] = matrix_to_json(np.array([[1.0, 1.0], [0.0, 1.0]]))
        self.assert_schema_error(data, "probe_basis", "orthonormal")


class TestDumpScheme(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_dump_then_load(self):
        rng = np.random.default_rng(0)
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        scheme = MeasurementScheme(2, 2, UnitaryOperator(q), Observable(np.kron(I2, np.diag([0.0, 1.5]))),
                                   DensityOperator.maximally_mixed(2))
        rho_s = DensityOperator.pure([1, 1j])
        writer = ResultWriter(self.temp_dir)
        scheme_path, state_path = dump_scheme(writer, scheme, rho_s, "schemes/trial_00004", {"trial": 4})
        self.assertEqual(scheme_path.name, "trial_00004.json")
        self.assertEqual(state_path.name, "trial_00004_state.json")

        loader = SchemeFileLoader()
        restored = loader.load_scheme(scheme_path)
        np.testing.assert_allclose(derive_unbiased_observable(restored).matrix,
                                   derive_unbiased_observable(scheme).matrix, atol=1e-12)
        np.testing.assert_allclose(loader.load_state(state_path).matrix, rho_s.matrix, atol=1e-15)
        self.assertEqual(json.loads(scheme_path.read_text())["metadata"]["trial"], 4)

    def test_dump_without_state(self):
        scheme = MeasurementScheme(2, 1, UnitaryOperator(np.eye(2)), Observable(np.diag([0.0, 1.0])),
                                   DensityOperator(np.array([[1.0]])))
        _, state_path = dump_scheme(ResultWriter(self.temp_dir), scheme, None, "scheme")
        self.assertIsNone(state_path)


if __name__ == '__main__':
    unittest.main()
