"""Tests for the two-step integrator, stability limits and energy sampling."""

import math

import numpy as np
import pytest

from src.boundary_closure import BoundaryCondition, EnforcementSpec, Method, assemble_single_block
from src.errors import InstabilityDetectedError
from src.sbp_core import build_grid, build_sbp_d4
from src.time_integration import (EnergyObserver, cfl_coefficient, integrate, make_time_grid, max_stable_dt,
                                  power_iteration, spectral_radius, step_backward)


def oscillator(omega):
    return np.array([[-omega ** 2]])


class TestTimeGrid:
    def test_step_hits_final_time(self):
        grid = make_time_grid(1.0, 0.3)
        assert grid.n_steps == 4
        assert grid.k == pytest.approx(0.25)
        assert grid.k * grid.n_steps == pytest.approx(1.0)

    def test_exact_division_keeps_step(self):
        grid = make_time_grid(1.0, 0.1)
        assert grid.n_steps == 10

    @pytest.mark.parametrize("t_final,k", [(0.0, 0.1), (-1.0, 0.1), (1.0, 0.0)])
    def test_invalid(self, t_final, k):
        with pytest.raises(ValueError):
            make_time_grid(t_final, k)


class TestStabilityLimits:
    def test_max_stable_dt(self):
        assert max_stable_dt(12.0) == pytest.approx(1.0)
        assert max_stable_dt(0.0) == math.inf
        with pytest.raises(ValueError):
            max_stable_dt(-1.0)

    def test_cfl_coefficient(self):
        assert cfl_coefficient(16.0) == pytest.approx(math.sqrt(12.0 / 16.0))

    def test_spectral_radius_dense(self):
        D = np.diag([-1.0, -4.0, -9.0])
        assert spectral_radius(D) == pytest.approx(9.0)
        assert spectral_radius(np.zeros((3, 3))) == 0.0

    def test_power_iteration_agrees(self):
        rng = np.random.default_rng(1)
        Q, _ = np.linalg.qr(rng.standard_normal((30, 30)))
        D = Q @ np.diag(-np.linspace(1.0, 50.0, 30)) @ Q.T
        assert power_iteration(D) == pytest.approx(50.0, rel=1e-8)

    def test_non_square(self):
        with pytest.raises(ValueError):
            spectral_radius(np.zeros((2, 3)))


def observed_time_rate(f1, f2, exact, omega, t_final, steps=(0.02, 0.01)):
    errors = []
    for k in steps:
        traj = integrate(oscillator(omega), np.array([f1]), np.array([f2]), k, t_final)
        errors.append(abs(traj.final[0] - exact(t_final)))
    return math.log2(errors[0] / errors[1])


class TestIntegrate:
    def test_displacement_start_is_third_order(self):
        # the Taylor start omits the k^4 D^2 f1 / 24 term; its O(k^4) error grows to O(k^3)
        omega = 3.0
        rate = observed_time_rate(1.0, 0.0, lambda t: math.cos(omega * t), omega, 2.0)
        assert rate == pytest.approx(3.0, abs=0.1)

    def test_velocity_start_is_fourth_order(self):
        # with f1 = 0 the start step is exact to O(k^5) and the recurrence sets the rate
        omega = 2.0
        rate = observed_time_rate(0.0, omega, lambda t: math.sin(omega * t), omega, 1.0)
        assert rate == pytest.approx(4.0, abs=0.1)

    @pytest.mark.parametrize("k2_rho,stable", [(11.9, True), (12.1, False)])
    def test_stability_boundary(self, k2_rho, stable):
        D = np.array([[-k2_rho]])
        peak = []

        def observer(step, t, v_prev, v_curr, v_next):
            peak.append(abs(v_next[0]))

        if stable:
            integrate(D, np.array([1.0]), np.array([0.0]), 1.0, 10_000.0, observers=[observer])
            assert len(peak) == 9_999
            assert max(peak) < 100.0
        else:
            with pytest.raises(InstabilityDetectedError):
                integrate(D, np.array([1.0]), np.array([0.0]), 1.0, 10_000.0, observers=[observer])

    def test_initial_velocity(self):
        omega = 2.0
        traj = integrate(oscillator(omega), np.array([0.0]), np.array([omega]), 0.01, 1.0)
        assert traj.final[0] == pytest.approx(math.sin(omega), abs=1e-5)

    def test_single_step(self):
        traj = integrate(oscillator(1.0), np.array([1.0]), np.array([0.0]), 1.0, 0.1)
        assert traj.final[0] == pytest.approx(math.cos(0.1), abs=1e-5)

    def test_snapshots(self):
        traj = integrate(oscillator(1.0), np.array([1.0]), np.array([0.0]), 0.01, 1.0,
                         snapshot_times=[0.5, 1.0])
        assert traj.snapshot_at(0.5)[0] == pytest.approx(math.cos(0.5), abs=1e-6)
        assert traj.times[0] == 0.0

    def test_instability_detected(self):
        omega = 10.0
        k = 4.0 / omega  # k sqrt(rho) = 4 > sqrt(12)
        with pytest.raises(InstabilityDetectedError):
            integrate(oscillator(omega), np.array([1.0]), np.array([0.0]), k, 200 * k)

    def test_time_reversal(self):
        rng = np.random.default_rng(2)
        D = -np.diag(np.linspace(1.0, 20.0, 8))
        f1 = rng.standard_normal(8)
        traj = integrate(D, f1, np.zeros(8), 0.05, 2.5)
        back = step_backward(D, traj.previous, traj.final, 0.05, 49)
        np.testing.assert_allclose(back, f1, atol=1e-8 * np.linalg.norm(f1))


class TestEnergyObserver:
    def test_clamped_sat_energy_is_conserved(self):
        ops = build_sbp_d4(2, build_grid(0.0, 1.0, 41))
        system = assemble_single_block(ops, 1.0, 1.0, BoundaryCondition.of("clamped", "left"),
                                       BoundaryCondition.of("clamped", "right"), EnforcementSpec(Method.SAT))
        # lowest discrete mode: the central-difference energy then varies by at most (k omega)^2 / 3
        lam, V = np.linalg.eig(system.D)
        f1 = V[:, np.argmin(np.abs(lam))].real
        k = 0.5 * max_stable_dt(spectral_radius(system.D))
        grid = make_time_grid(0.2, k)
        observer = EnergyObserver(system.mass, system.stiffness, grid.k)
        integrate(system.D, f1, np.zeros_like(f1), k, 0.2, observers=[observer])
        assert len(observer.values) == grid.n_steps - 1
        assert observer.relative_drift() < 1e-4

    def test_empty_drift(self):
        assert EnergyObserver(np.ones(2), np.eye(2), 0.1).relative_drift() == 0.0
