"""Tests for result schemas and the output writer."""

import csv
import json

import numpy as np
import pytest

from core import CSV_COLUMNS, Check, ExperimentCell, ExperimentResult, OutputWriter, ResultRow
from src.report import format_result


def sample_result():
    rows = [
        ResultRow(experiment="convergence", order=2, method="sat", bc_or_interface="clamped", m=21,
                  h=0.05, k=1e-4, eps=1.25e-3, provenance={"alpha_II": 0.625}),
        ResultRow(experiment="convergence", order=2, method="sat", bc_or_interface="clamped", m=41,
                  h=0.025, k=2.5e-5, eps=3.1e-4, rate=2.01),
    ]
    checks = [Check(name="order 2 sat/clamped rate", passed=True, measured=2.01, expected=2.0, tol=0.25)]
    return ExperimentResult(kind="convergence", rows=rows, checks=checks, metadata={"config_hash": "abc"})


class TestSchemas:
    def test_csv_values_follow_columns(self):
        row = sample_result().rows[0]
        values = row.csv_values()
        assert len(values) == len(CSV_COLUMNS)
        assert values[CSV_COLUMNS.index("rate")] == ""
        assert float(values[CSV_COLUMNS.index("eps")]) == 1.25e-3

    def test_passed(self):
        result = sample_result()
        assert result.passed
        result.checks.append(Check(name="advisory", passed=False, advisory=True))
        assert result.passed
        result.rows[0].status = "error"
        assert not result.passed

    @pytest.mark.parametrize("status,passed", [("ok", True), ("roundoff", True), ("infeasible", True),
                                               ("advisory", False), ("fail", False)])
    def test_row_status_verdict(self, status, passed):
        result = sample_result()
        result.rows[1].status = status
        assert result.passed is passed

    def test_cell_ordering(self):
        cells = [ExperimentCell(experiment="spectral-table", order=2, method="sat", conditions="free", m=41),
                 ExperimentCell(experiment="spectral-table", order=2, method="sat", conditions="free", m=21)]
        assert [c.m for c in sorted(cells, key=lambda c: c.sort_key)] == [21, 41]


class TestOutputWriter:
    def test_result_files(self, tmp_path):
        writer = OutputWriter(tmp_path)
        path = writer.write_result(sample_result())
        with open(path) as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 3
        sidecar = json.loads((tmp_path / "convergence_provenance.json").read_text())
        assert sidecar["rows"][0]["provenance"] == {"alpha_II": 0.625}
        assert sidecar["checks"][0]["passed"] is True

    def test_trace_and_matrix(self, tmp_path):
        writer = OutputWriter(tmp_path)
        trace = writer.write_trace("energy", [{"t": 0.0, "energy": 1.0, "errnorm": None}])
        assert trace.read_text().splitlines() == ["t,energy,errnorm", "0.0,1.0,"]
        matrix = writer.write_matrix("D", np.arange(6.0).reshape(2, 3))
        np.testing.assert_array_equal(np.loadtxt(matrix), np.arange(6.0).reshape(2, 3))

    def test_summary(self, tmp_path):
        text = format_result(sample_result())
        assert "PASS order 2 sat/clamped rate" in text
        assert text.strip().endswith("PASSED")
        assert OutputWriter(tmp_path).write_summary(text).read_text() == text
