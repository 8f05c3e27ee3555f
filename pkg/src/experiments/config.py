"""
Experiment Configuration
========================

ExperimentConfig holds every knob of the sweeps. Values come from, in
increasing precedence: dataclass defaults, a config file (JSON or plain
key=value), and command-line flags. The QMETER_SEED environment variable
(or .env entry) only replaces the default master seed.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from dotenv import dotenv_values, load_dotenv

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240601
SEED_ENV_VAR = "QMETER_SEED"
MAX_TOTAL_DIM = 25
# sigma_y is excluded: the qubit sweeps start from its +1 eigenstate, so Delta B = 0.
NDR_OBSERVABLES = ("sigma_x", "sigma_z")


class ExperimentConfigError(Exception):
    """Custom exception for invalid experiment configuration."""
    pass


def default_seed() -> int:
    """The documented seed constant, unless QMETER_SEED overrides it."""
    raw = os.getenv(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return int(raw.strip(), 0)
    except ValueError as e:
        raise ExperimentConfigError(f"{SEED_ENV_VAR} is not an integer: {raw!r}") from e


@dataclass
class ExperimentConfig:
    """
    Configuration shared by the random sweep, the qubit trade-off search and
    the noise-disturbance sweep.

    ground_rank: dimension of the zero eigenspace of random meters (None
        means d_S of the trial).
    max_attempts: cap on Haar draws in the qubit searches (None means
        20 x trials).
    """
    trials: int = 1000
    master_seed: int = DEFAULT_SEED
    dim_range: Tuple[int, ...] = (2, 3, 4, 5)
    unbias_tol: float = 1e-5
    reg_tol: float = 1e-8
    max_restarts: int = 50
    workers: int = 1
    ground_rank: Optional[int] = None
    max_attempts: Optional[int] = None
    optimizer_tol: float = 1e-9
    optimizer_max_iter: int = 4000
    observable_b: str = "sigma_x"

    def validate(self) -> "ExperimentConfig":
        """
        Check every field.

        Raises:
            ExperimentConfigError: Naming the first invalid field
        """
        if self.trials < 1:
            raise ExperimentConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ExperimentConfigError("master_seed must be a 64-bit unsigned integer")
        if not self.dim_range:
            raise ExperimentConfigError("dim_range must not be empty")
        if any(d < 1 for d in self.dim_range):
            raise ExperimentConfigError(f"dim_range entries must be positive, got {self.dim_range}")
        if max(self.dim_range) ** 2 > MAX_TOTAL_DIM:
            raise ExperimentConfigError(
                f"d_S * d_P may reach {max(self.dim_range) ** 2}, above the supported {MAX_TOTAL_DIM}"
            )
        for name in ("unbias_tol", "reg_tol", "optimizer_tol"):
            if not getattr(self, name) > 0:
                raise ExperimentConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("max_restarts", "workers", "optimizer_max_iter"):
            if getattr(self, name) < 1:
                raise ExperimentConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.ground_rank is not None and self.ground_rank < 1:
            raise ExperimentConfigError(f"ground_rank must be >= 1, got {self.ground_rank}")
        if self.max_attempts is not None and self.max_attempts < 1:
            raise ExperimentConfigError(f"max_attempts must be >= 1, got {self.max_attempts}")
        if self.observable_b == "sigma_y":
            raise ExperimentConfigError(
                "observable_b sigma_y has Delta B = 0 on the qubit state (I + sigma_y)/2"
            )
        if self.observable_b not in NDR_OBSERVABLES:
            raise ExperimentConfigError(
                f"observable_b must be one of {', '.join(NDR_OBSERVABLES)}, got {self.observable_b!r}"
            )
        return self

    @property
    def attempt_cap(self) -> int:
        return self.max_attempts if self.max_attempts is not None else 20 * self.trials

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["dim_range"] = list(self.dim_range)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base: Optional["ExperimentConfig"] = None) -> "ExperimentConfig":
        """
        Overlay string or typed values onto a base configuration.

        Raises:
            ExperimentConfigError: On unknown keys or values of the wrong type
        """
        values = (base or cls()).to_dict()
        known = {f.name: f for f in fields(cls)}
        aliases = {"seed": "master_seed", "dims": "dim_range"}
        for raw_key, raw_value in data.items():
            key = aliases.get(raw_key.strip().lower().replace("-", "_"), raw_key.strip().lower().replace("-", "_"))
            if key not in known:
                raise ExperimentConfigError(f"unknown config key: {raw_key!r}")
            try:
                values[key] = _coerce(key, raw_value)
            except (TypeError, ValueError) as e:
                raise ExperimentConfigError(f"invalid value for {key}: {raw_value!r}") from e
        values["dim_range"] = tuple(values["dim_range"])
        return cls(**values).validate()


_INT_FIELDS = {"trials", "master_seed", "max_restarts", "workers", "ground_rank",
               "max_attempts", "optimizer_max_iter"}
_FLOAT_FIELDS = {"unbias_tol", "reg_tol", "optimizer_tol"}


def _coerce(key: str, value: Any) -> Any:
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "null")):
        if key in ("ground_rank", "max_attempts"):
            return None
        raise ValueError("empty value")
    if key in _INT_FIELDS:
        if isinstance(value, str):
            return int(value.strip(), 0)
        if isinstance(value, float) and not value.is_integer():
            raise ValueError("not an integer")
        return int(value)
    if key in _FLOAT_FIELDS:
        return float(value)
    if key == "dim_range":
        if isinstance(value, str):
            items = [v for v in value.replace("{", "").replace("}", "").split(",") if v.strip()]
            return tuple(int(v.strip()) for v in items)
        return tuple(int(v) for v in value)
    return str(value).strip()


def load_config_file(config_file: Union[str, Path],
                     base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """
    Read a JSON or key=value configuration file.

    Args:
        config_file: Path to the configuration file
        base: Configuration the file values are laid over

    Returns:
        ExperimentConfig: Validated configuration

    Raises:
        ExperimentConfigError: If the file is missing or malformed
    """
    path = Path(config_file)
    if not path.is_file():
        raise ExperimentConfigError(f"Config file not found: {path}")
    try:
        if path.suffix.lower() == ".json":
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
            if not isinstance(data, dict):
                raise ExperimentConfigError("JSON config must be an object")
        else:
            data = dict(dotenv_values(path))
    except ExperimentConfigError:
        raise
    except Exception as e:
        error_msg = f"Failed to read config file {path}: {str(e)}"
        logger.error(error_msg)
        raise ExperimentConfigError(error_msg) from e

    logger.info(f"Loaded {len(data)} config values from {path}")
    return ExperimentConfig.from_dict(data, base=base)
