"""
Result Writer Module
Writes sweep records, plot-data files and the run manifest to an output directory.
Record tables are CSV (fixed column order, 17-significant-digit floats, LF line
endings) or JSON; identical runs produce byte-identical data files.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

MANIFEST_NAME = "run_manifest.json"
FORMATS = ("csv", "json")


class ResultWriterError(Exception):
    """Custom exception for result writing errors."""
    pass


def format_value(value: Any) -> str:
    """Render one cell: floats with 17 significant digits, booleans lower-case, None empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return "nan"
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return f"{number:.17g}"
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else format_value(number)
    return value


@dataclass
class RunManifest:
    """Provenance of one CLI run."""
    subcommand: str
    config: Dict[str, Any]
    master_seed: int
    tool_version: str
    outputs: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    timestamp: str = field(default_factory=lambda: pd.Timestamp.now().isoformat())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "config": self.config,
            "master_seed": self.master_seed,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
            "outputs": list(self.outputs),
            "summary": {k: _json_value(v) for k, v in self.summary.items()},
        }


class ResultWriter:
    """
    Writes result files into one output directory and keeps track of every
    path written so the manifest can list them.
    """

    def __init__(self, output_dir: Union[str, Path] = "results"):
        """
        Initialize the result writer.

        Args:
            output_dir: Directory to save result files
        """
        self.output_dir = Path(output_dir)
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ResultWriterError(f"Cannot create output directory {self.output_dir}: {e}") from e
        self.written: List[Path] = []

        # Setup logging
        self.logger = self._setup_logging()

    def _setup_logging(self) -> logging.Logger:
        """Setup logging configuration."""
        logger = logging.getLogger(f"{__name__}.ResultWriter")

        if not logger.handlers and not logging.getLogger().handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            handler.setFormatter(formatter)
            logger.addHandler(handler)

        return logger

    def write_records(self, records: Sequence[Dict[str, Any]], columns: Sequence[str],
                      name: str, fmt: str = "csv") -> Path:
        """
        Write a record table.

        Args:
            records: Row dictionaries (extra keys are ignored)
            columns: Column order of the output
            name: File name without suffix
            fmt: "csv" or "json"

        Returns:
            Path: Path to the written file
        """
        if fmt not in FORMATS:
            raise ResultWriterError(f"Unsupported format: {fmt}")
        path = self.output_dir / f"{name}.{fmt}"
        try:
            if fmt == "csv":
                rows = [[format_value(record.get(column)) for column in columns] for record in records]
                df = pd.DataFrame(rows, columns=list(columns), dtype=object)
                df.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
            else:
                rows = [{column: _json_value(record.get(column)) for column in columns} for record in records]
                with open(path, "w", encoding="utf-8", newline="\n") as f:
                    json.dump({"columns": list(columns), "records": rows}, f, indent=2, ensure_ascii=False)
                    f.write("\n")
        except Exception as e:
            error_msg = f"Failed to write {path}: {str(e)}"
            self.logger.error(error_msg)
            raise ResultWriterError(error_msg) from e

        self.written.append(path)
        self.logger.info(f"Wrote {len(records)} records to {path}")
        return path

    def write_plot_data(self, pairs: Sequence[Sequence[float]], columns: Sequence[str], name: str) -> Path:
        """Write (x, y, ...) tuples as a CSV plot-data file."""
        records = [dict(zip(columns, pair)) for pair in pairs]
        return self.write_records(records, columns, name, fmt="csv")

    def write_json(self, data: Dict[str, Any], name: str) -> Path:
        """Write one JSON document (scheme or state dumps)."""
        path = self.output_dir / name
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                json.dump(data, f, indent=2, ensure_ascii=False)
                f.write("\n")
        except Exception as e:
            error_msg = f"Failed to write {path}: {str(e)}"
            self.logger.error(error_msg)
            raise ResultWriterError(error_msg) from e

        self.written.append(path)
        return path

    def create_run_manifest(self, manifest: RunManifest) -> Path:
        """
        Write run_manifest.json listing every file written so far.

        Args:
            manifest: Run provenance; outputs are filled in from this writer

        Returns:
            Path: Path to the manifest file
        """
        try:
            manifest.outputs = [p.relative_to(self.output_dir).as_posix() for p in self.written]
            manifest_path = self.output_dir / MANIFEST_NAME
            with open(manifest_path, "w", encoding="utf-8", newline="\n") as f:
                json.dump(manifest.to_dict(), f, indent=2, ensure_ascii=False)
                f.write("\n")

            self.logger.info(f"Created run manifest: {manifest_path}")
            return manifest_path

        except Exception as e:
            error_msg = f"Failed to create run manifest: {str(e)}"
            self.logger.error(error_msg)
            raise ResultWriterError(error_msg) from e


def reference_curve(xs: Sequence[float], fn) -> List[List[float]]:
    """Sample a reference curve y = fn(x) on the given abscissae."""
    return [[float(x), float(fn(x))] for x in xs]


def summarize(values: Sequence[Optional[float]]) -> Dict[str, float]:
    """Min / max of the finite entries, used in manifest summaries."""
    finite = [float(v) for v in values if isinstance(v, (int, float)) and math.isfinite(v)]
    if not finite:
        return {}
    return {"min": min(finite), "max": max(finite)}
