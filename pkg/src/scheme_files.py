"""
Scheme File Loader
Reads and validates the JSON encodings used by the verify command:
- matrix:  {"dim": n, "re": [[...]], "im": [[...]]} with an optional "kind"
- scheme:  {"d_S", "d_P", "U", "M", "rho_P", optional "probe_basis", optional "metadata"}
Validation errors carry the dotted path of the first offending field.
"""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, TypeVar, Union

from .linalg_core import LinalgError, matrix_from_json
from .measurement.scheme import MeasurementError, MeasurementScheme
from .quantum_types import DensityOperator, Observable, QuantumTypeError, UnitaryOperator
from .result_writer import ResultWriter

T = TypeVar("T")


class SchemaError(Exception):
    """Custom exception for scheme and matrix file validation errors."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class SchemeFileLoader:
    """
    Loads schemes, states and observables from JSON files.
    """

    def __init__(self):
        """Initialize the loader."""
        # Setup logging
        self.logger = self._setup_logging()

    def _setup_logging(self) -> logging.Logger:
        """Setup logging configuration."""
        logger = logging.getLogger(f"{__name__}.SchemeFileLoader")

        if not logger.handlers and not logging.getLogger().handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            handler.setFormatter(formatter)
            logger.addHandler(handler)

        return logger

    def validate_file(self, file_path: Union[str, Path]) -> None:
        """
        Validate that the file exists and is a JSON file.

        Args:
            file_path: Path to the file to validate

        Raises:
            SchemaError: If the file doesn't exist or has an unsupported extension
        """
        file_path = Path(file_path)

        if not file_path.exists():
            raise SchemaError(str(file_path), "file not found")

        if not file_path.is_file():
            raise SchemaError(str(file_path), "path is not a file")

        if file_path.suffix.lower() != ".json":
            raise SchemaError(
                str(file_path),
                f"unsupported file type {file_path.suffix or '(none)'}; expected .json",
            )

    def _read_json(self, file_path: Union[str, Path]) -> Dict[str, Any]:
        self.validate_file(file_path)
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            error_msg = f"invalid JSON: {str(e)}"
            self.logger.error(f"Failed to parse {file_path}: {error_msg}")
            raise SchemaError("$", error_msg) from e
        if not isinstance(data, dict):
            raise SchemaError("$", "top level must be an object")
        return data

    def load_scheme(self, file_path: Union[str, Path]) -> MeasurementScheme:
        """
        Load and validate a scheme file.

        Args:
            file_path: Path to the scheme JSON file

        Returns:
            MeasurementScheme: The validated scheme

        Raises:
            SchemaError: Naming the offending field
        """
        self.logger.info(f"Loading scheme: {file_path}")
        data = self._read_json(file_path)
        scheme = parse_scheme(data)
        self.logger.info(f"Loaded scheme with d_S={scheme.d_s}, d_P={scheme.d_p}")
        return scheme

    def load_state(self, file_path: Union[str, Path]) -> DensityOperator:
        """Load a density-operator file."""
        data = self._read_json(file_path)
        return _typed_matrix(data, "$", DensityOperator, expected_kind="density")

    def load_observable(self, file_path: Union[str, Path]) -> Observable:
        """Load an observable file."""
        data = self._read_json(file_path)
        return _typed_matrix(data, "$", Observable, expected_kind="observable")


def _typed_matrix(data: Any, path: str, build: Callable[[Any], T],
                  expected_kind: Optional[str] = None) -> T:
    if isinstance(data, dict) and expected_kind and data.get("kind", expected_kind) != expected_kind:
        raise SchemaError(f"{path}.kind" if path != "$" else "kind",
                          f"expected '{expected_kind}', got {data.get('kind')!r}")
    try:
        return build(matrix_from_json(data, name=path))
    except LinalgError as e:
        raise SchemaError(path, str(e)) from e
    except QuantumTypeError as e:
        raise SchemaError(path, str(e)) from e


def _positive_int(data: Dict[str, Any], key: str) -> int:
    if key not in data:
        raise SchemaError(key, "missing field")
    value = data[key]
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise SchemaError(key, f"must be a positive integer, got {value!r}")
    return value


def _required(data: Dict[str, Any], key: str) -> Any:
    if key not in data:
        raise SchemaError(key, "missing field")
    return data[key]


def parse_scheme(data: Dict[str, Any]) -> MeasurementScheme:
    """
    Validate a decoded scheme document field by field.

    Raises:
        SchemaError: Naming the first offending field
    """
    d_s = _positive_int(data, "d_S")
    d_p = _positive_int(data, "d_P")
    total = d_s * d_p

    unitary = _typed_matrix(_required(data, "U"), "U", UnitaryOperator, expected_kind="unitary")
    if unitary.dim != total:
        raise SchemaError("U", f"dimension {unitary.dim} does not match d_S*d_P={total}")
    meter = _typed_matrix(_required(data, "M"), "M", Observable, expected_kind="observable")
    if meter.dim != total:
        raise SchemaError("M", f"dimension {meter.dim} does not match d_S*d_P={total}")
    if not meter.zero_grounded:
        raise SchemaError("M", f"minimum eigenvalue must be 0, got {meter.min_eigenvalue:.3e}")
    rho_p = _typed_matrix(_required(data, "rho_P"), "rho_P", DensityOperator, expected_kind="density")
    if rho_p.dim != d_p:
        raise SchemaError("rho_P", f"dimension {rho_p.dim} does not match d_P={d_p}")

    basis = None
    if data.get("probe_basis") is not None:
        try:
            basis = matrix_from_json(data["probe_basis"], name="probe_basis")
        except LinalgError as e:
            raise SchemaError("probe_basis", str(e)) from e
    if "metadata" in data and not isinstance(data["metadata"], dict):
        raise SchemaError("metadata", "must be an object")

    try:
        return MeasurementScheme(d_s=d_s, d_p=d_p, unitary=unitary, meter=meter,
                                 rho_p=rho_p, probe_basis=basis)
    except MeasurementError as e:
        raise SchemaError("probe_basis" if basis is not None else "$", str(e)) from e


def dump_scheme(writer: ResultWriter, scheme: MeasurementScheme, rho_s: Optional[DensityOperator],
                name: str, metadata: Optional[Dict[str, Any]] = None) -> Tuple[Path, Optional[Path]]:
    """
    Write a scheme file, plus a companion state file for rho_S.

    Args:
        writer: Result writer owning the output directory
        scheme: Scheme to dump
        rho_s: Initial state of S (skipped if None)
        name: Base file name, e.g. "schemes/trial_0003"
        metadata: Extra metadata (originating trial, residual, ...)

    Returns:
        Tuple of (scheme path, state path or None)
    """
    scheme_path = writer.write_json(scheme.to_json(metadata), f"{name}.json")
    state_path = None
    if rho_s is not None:
        state_path = writer.write_json(rho_s.to_json(), f"{name}_state.json")
    return scheme_path, state_path
