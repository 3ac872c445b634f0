"""End-to-end tests of the experiment runner, output files and command line."""

import csv
import json

import numpy as np
import pytest

from core import CSV_COLUMNS, ResultRow
from src.cli import main
from src.config import ExperimentConfig
from src.errors import IncompatibleSpecError
from src.experiments import (REFERENCE_RHO_BOUNDARY, REFERENCE_RHO_RING, ExperimentRunner, build_system,
                             exact_solution, extrapolate_in_m, mark_roundoff, observed_rate, run_alpha_scan,
                             run_convergence, run_energy_trace, run_spectral_table)
from src.system import eigenvalue_bounds


def make_config(tmp_path, **values):
    values.setdefault("orders", [2])
    values.setdefault("random_seed", 0)
    return ExperimentConfig(output_dir=tmp_path, **values)


class TestHelpers:
    def test_extrapolation_removes_h_squared(self):
        values = [(h, 16.0 - 3.0 * h ** 2) for h in (0.1, 0.05)]
        assert extrapolate_in_m(values) == pytest.approx(16.0)

    def test_observed_rate(self):
        assert observed_rate(1e-2, 2.5e-3, 0.1, 0.05) == pytest.approx(2.0)

    def test_roundoff_rows_are_flagged(self):
        rows = [ResultRow(experiment="convergence", order=4, method="sat", bc_or_interface="clamped",
                          m=m, h=1.0 / (m - 1), eps=eps, provenance={"u_norm": 1.0})
                for m, eps in ((21, 1e-5), (41, 6e-7), (81, 5e-9), (161, 4e-9))]
        usable = mark_roundoff(rows, 4)
        assert [r.m for r in usable] == [21, 41, 81]
        assert rows[-1].status == "roundoff"

    @staticmethod
    def ladder(order, errors):
        return [ResultRow(experiment="convergence", order=order, method="sat", bc_or_interface="clamped",
                          m=m, h=1.0 / (m - 1), eps=eps, provenance={"u_norm": 1.0})
                for m, eps in zip((21, 41, 81, 161), errors)]

    def test_rate_collapse_marks_the_floor(self):
        # rates 5.0, 5.0, then 3.6 with errors still far above roundoff
        rows = self.ladder(6, (1e-4, 3.1e-6, 9.8e-8, 8e-9))
        usable = mark_roundoff(rows, 6)
        assert [r.m for r in usable] == [21, 41, 81]
        assert [r.status for r in rows] == ["ok", "ok", "ok", "roundoff"]

    def test_preasymptotic_ladder_is_kept(self):
        # rates 2.7, 3.6, 3.9 approach the expected 4 from below
        rows = self.ladder(4, (1e-3, 1.5e-4, 1.2e-5, 8e-7))
        assert [r.m for r in mark_roundoff(rows, 4)] == [21, 41, 81, 161]
        assert all(r.status == "ok" for r in rows)

    def test_roundoff_level_error_starts_the_floor(self):
        rows = self.ladder(2, (1e-3, 2.5e-4, 1e-15, 1e-15))
        assert [r.m for r in mark_roundoff(rows, 2)] == [21, 41]
        assert rows[2].status == rows[3].status == "roundoff"

    def test_hybrid_needs_interface(self):
        with pytest.raises(IncompatibleSpecError):
            build_system(2, "hybrid", "clamped", 21)

    def test_ring_exact_solution_matches_layout(self):
        system = build_system(2, "projection", "ring", 21)
        blocks = exact_solution(system, "ring")(0.0)
        assert [len(b) for b in blocks] == [21, 21]
        # continuity at x = 0 in the reference data
        assert blocks[0][-1] == pytest.approx(blocks[1][0], abs=1e-10)


def reference_cases():
    for (conditions, method), values in sorted(REFERENCE_RHO_BOUNDARY.items()):
        for order, rho in sorted(values.items()):
            yield pytest.param(order, method, conditions, rho, id=f"{order}-{method}-{conditions}")
    for method, values in sorted(REFERENCE_RHO_RING.items()):
        for order, rho in sorted(values.items()):
            yield pytest.param(order, method, "ring", rho, id=f"{order}-{method}-ring")


class TestReferenceSpectralRadii:
    @pytest.mark.parametrize("order,method,conditions,expected", list(reference_cases()))
    def test_extrapolated_rho(self, order, method, conditions, expected):
        values = []
        for m in (81, 161):
            system = build_system(order, method, conditions, m)
            values.append((system.h, eigenvalue_bounds(system)[2] * system.h ** 4))
        tol = 1e-2 if order == 6 else 1e-3
        assert extrapolate_in_m(values) == pytest.approx(expected, abs=tol)


class TestSpectralTable:
    def test_rows_and_checks(self, tmp_path):
        config = make_config(tmp_path, kind="spectral-table", methods=["sat", "projection"],
                             conditions=["clamped", "free"], spectral_m_list=[21, 41])
        result = run_spectral_table(config)
        assert len(result.rows) == 8
        assert all(row.status == "ok" for row in result.rows)
        assert all(row.rho_undivided > 0 for row in result.rows)
        names = [check.name for check in result.checks]
        assert "order 2 sat/clamped rho" in names
        assert "order 2 projection independent of boundary kind" in names
        assert "rho_extrapolated" in result.rows[0].provenance

    def test_ring_methods(self, tmp_path):
        config = make_config(tmp_path, kind="spectral-table", methods=["sat", "projection", "hybrid"],
                             conditions=["ring"], spectral_m_list=[21, 31])
        result = run_spectral_table(config)
        assert {row.method for row in result.rows} == {"sat", "projection", "hybrid"}
        assert all(row.status == "ok" for row in result.rows)

    def test_rows_are_ordered(self, tmp_path):
        config = make_config(tmp_path, kind="spectral-table", methods=["sat"], conditions=["free", "clamped"],
                             spectral_m_list=[21, 31], workers=2)
        rows = run_spectral_table(config).rows
        keys = [(r.bc_or_interface, r.m) for r in rows]
        assert keys == sorted(keys)


class TestConvergence:
    def test_errors_decrease(self, tmp_path):
        config = make_config(tmp_path, kind="convergence", methods=["sat"], conditions=["clamped"],
                             m_list=[21, 41], t_final=0.05)
        result = run_convergence(config)
        coarse, fine = result.rows
        assert coarse.eps > fine.eps > 0
        assert fine.rate is not None and fine.rate > 1.0
        assert fine.k * round(0.05 / fine.k) == pytest.approx(0.05)

    def test_mixed_ends_have_no_reference(self, tmp_path):
        config = make_config(tmp_path, kind="convergence", methods=["sat"], conditions=["clamped-free"],
                             m_list=[21, 41], t_final=0.01)
        result = run_convergence(config)
        assert all(row.status == "error" for row in result.rows)
        assert not result.passed


class TestEnergyTrace:
    def test_trace_written(self, tmp_path):
        config = make_config(tmp_path, kind="energy-trace", methods=["projection"], conditions=["free"],
                             energy_m=31, t_final=0.02)
        result = run_energy_trace(config)
        row, = result.rows
        assert row.energy_drift is not None and row.energy_drift < 1e-2
        trace = tmp_path / row.provenance["trace"]
        with open(trace) as f:
            lines = list(csv.reader(f))
        assert lines[0] == ["t", "energy", "errnorm"]
        assert len(lines) > 2


class TestAlphaScan:
    def test_infeasible_pairs_are_marked(self, tmp_path):
        config = make_config(tmp_path, kind="alpha-scan", alpha_grid=[0.1, 5.0], scan_m=21, t_final=0.002)
        result = run_alpha_scan(config)
        statuses = {(r.provenance["alpha_II"], r.provenance["alpha_III"]): r.status for r in result.rows}
        assert statuses[(5.0, 5.0)] == "infeasible"
        assert statuses[(0.1, 0.1)] == "ok"
        assert len(result.rows) == 5
        feasible = next(c for c in result.checks if c.name == "order 2 standard pair feasible")
        assert feasible.passed


class TestOperatorsAndAlphas:
    def test_verify_operators(self, tmp_path):
        result = ExperimentRunner(make_config(tmp_path, kind="verify-operators")).run_kind()
        assert all(row.status == "ok" for row in result.rows)
        assert all(c.passed for c in result.checks), [c for c in result.checks if not c.passed]

    def test_standard_alphas(self, tmp_path):
        result = ExperimentRunner(make_config(tmp_path, kind="alphas")).run_kind()
        assert len(result.rows) == 2
        assert all(c.passed for c in result.checks)


class TestCommandLine:
    def test_writes_outputs(self, tmp_path):
        code = main(["spectral-table", "--order", "2", "--bc", "free", "--method", "sat",
                     "--m-list", "81,161", "--out", str(tmp_path)])
        assert code == 0
        with open(tmp_path / "spectral-table.csv") as f:
            header = next(csv.reader(f))
        assert tuple(header) == CSV_COLUMNS
        sidecar = json.loads((tmp_path / "spectral-table_provenance.json").read_text())
        assert sidecar["metadata"]["config_hash"]
        assert (tmp_path / "summary.txt").read_text().strip().endswith("PASSED")

    def test_dump_matrices(self, tmp_path):
        main(["spectral-table", "--order", "2", "--bc", "clamped", "--method", "projection",
              "--m-list", "21,31", "--out", str(tmp_path), "--dump-matrices"])
        dumped = sorted((tmp_path / "matrices").glob("*.txt"))
        assert len(dumped) == 2
        assert np.loadtxt(dumped[0]).shape == (21, 21)

    @pytest.mark.parametrize("argv", [
        ["convergence", "--cfl-frac", "2.0"],
        ["spectral-table", "--method", "hybrid", "--bc", "clamped"],
    ])
    def test_bad_configuration(self, argv, tmp_path):
        assert main(argv + ["--out", str(tmp_path)]) == 2

    def test_unknown_experiment(self):
        with pytest.raises(SystemExit):
            main(["bogus"])


@pytest.mark.slow
class TestConvergenceLadder:
    def test_order2_clamped_sat_rate(self, tmp_path):
        config = make_config(tmp_path, kind="convergence", methods=["sat"], conditions=["clamped"],
                             m_list=[21, 41, 81, 161], t_final=0.1)
        result = run_convergence(config)
        check, = [c for c in result.checks if c.name == "order 2 sat/clamped rate"]
        assert check.passed, check

    @pytest.mark.parametrize("order,conditions", [(4, "clamped"), (6, "clamped"), (4, "free"), (6, "free")])
    def test_high_order_rates(self, tmp_path, order, conditions):
        config = make_config(tmp_path, kind="convergence", orders=[order], methods=["sat", "projection"],
                             conditions=[conditions], m_list=[21, 41, 81, 161], t_final=0.1)
        result = run_convergence(config)
        rates = [c for c in result.checks if c.name.endswith(" rate")]
        assert len(rates) == 2
        assert all(c.passed for c in rates), rates

    @pytest.mark.parametrize("order", [2, 4, 6])
    def test_ring_rates(self, tmp_path, order):
        config = make_config(tmp_path, kind="convergence", orders=[order], methods=["sat", "projection", "hybrid"],
                             conditions=["ring"], m_list=[21, 41, 81, 161], t_final=0.1)
        result = run_convergence(config)
        rates = [c for c in result.checks if c.name.endswith(" rate")]
        assert len(rates) == 3
        assert all(c.passed for c in rates), rates
