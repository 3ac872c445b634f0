"""Output writer for experiment results."""

import csv
import json
from pathlib import Path
from typing import Dict, Iterable, List

import numpy as np

from .schemas import CSV_COLUMNS, ExperimentResult


class OutputWriter:
    """Writes results to the output folder: one CSV per experiment kind."""

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def write_result(self, result: ExperimentResult) -> Path:
        """Write the CSV plus a provenance sidecar."""
        path = self.output_dir / f"{result.kind}.csv"
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in result.rows:
                writer.writerow(row.csv_values())

        sidecar = {
            "metadata": result.metadata,
            "rows": [{"key": row.csv_values()[:5], "provenance": row.provenance, "message": row.message}
                     for row in result.rows],
            "checks": [check.model_dump() for check in result.checks],
        }
        (self.output_dir / f"{result.kind}_provenance.json").write_text(
            json.dumps(sidecar, indent=2, sort_keys=True, default=str))
        return path

    def write_trace(self, name: str, rows: Iterable[Dict[str, float]],
                    columns: List[str] = ("t", "energy", "errnorm")) -> Path:
        """Time traces: one line per sampled step."""
        path = self.output_dir / "traces" / f"{name}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow(["" if row.get(c) is None else repr(float(row[c])) for c in columns])
        return path

    def write_matrix(self, name: str, matrix: np.ndarray) -> Path:
        """Row-major decimal text, one matrix row per line."""
        path = self.output_dir / "matrices" / f"{name}.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, np.atleast_2d(matrix), fmt="%.17e")
        return path

    def write_summary(self, text: str) -> Path:
        path = self.output_dir / "summary.txt"
        path.write_text(text)
        return path
