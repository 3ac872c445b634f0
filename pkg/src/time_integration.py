"""
Explicit fourth-order two-step integration of v_tt = D v.

    v0     = f1
    v1     = (I + k^2/2 D) f1 + k (I + k^2/6 D) f2
    v(n+1) = (2I + k^2 D + k^4/12 D^2) v(n) - v(n-1)

The recurrence is stable for k^2 rho(D) < 12.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import linalg

from .errors import InstabilityDetectedError, NonConvergenceError

logger = logging.getLogger(__name__)

STABILITY_LIMIT = 12.0
DENSE_EIG_LIMIT = 2000
POWER_TOL = 1e-10
POWER_MAX_ITER = 100_000
BLOWUP_FACTOR = 1e6

# observer(step, t, v_prev, v_curr, v_next) is called once per completed step
Observer = Callable[[int, float, np.ndarray, np.ndarray, np.ndarray], None]


@dataclass(frozen=True)
class TimeGrid:
    k: float
    n_steps: int
    t_final: float


def make_time_grid(t_final: float, k_target: float) -> TimeGrid:
    """Largest k <= k_target with n k = t_final."""
    if t_final <= 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    if not k_target > 0:
        raise ValueError(f"time step must be positive, got {k_target}")
    n_steps = max(1, math.ceil(t_final / k_target - 1e-12))
    return TimeGrid(k=t_final / n_steps, n_steps=n_steps, t_final=t_final)


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    snapshots: List[np.ndarray] = field(default_factory=list)
    final: Optional[np.ndarray] = None
    previous: Optional[np.ndarray] = None

    def snapshot_at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return self.snapshots[i]


# ══════════════════════════════════════════════════════════════════════════════
#  SPECTRAL RADIUS AND CFL
# ══════════════════════════════════════════════════════════════════════════════

def power_iteration(D: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER,
                    seed: int = 0) -> float:
    """Dominant eigenvalue magnitude of D by normalized power iteration."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(D.shape[0])
    x /= np.linalg.norm(x)
    estimate = 0.0
    for iteration in range(1, max_iter + 1):
        # two products per sweep so a +-rho pair does not oscillate
        y = D @ (D @ x)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        new = math.sqrt(norm)
        x = y / norm
        if abs(new - estimate) <= tol * new:
            logger.debug("power iteration converged after %d sweeps", iteration)
            return new
        estimate = new
    raise NonConvergenceError(f"power iteration did not converge in {max_iter} sweeps")


def spectral_radius(D: np.ndarray) -> float:
    """Largest eigenvalue magnitude."""
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"spectral radius needs a square matrix, got shape {D.shape}")
    if D.size == 0 or not np.any(D):
        return 0.0
    if D.shape[0] <= DENSE_EIG_LIMIT:
        return float(np.max(np.abs(linalg.eigvals(D))))
    return power_iteration(D)


def max_stable_dt(rho: float) -> float:
    """sqrt(12 / rho); infinite for rho = 0."""
    if rho < 0:
        raise ValueError(f"spectral radius must be non-negative, got {rho}")
    if rho == 0:
        return math.inf
    return math.sqrt(STABILITY_LIMIT / rho)


def cfl_coefficient(rho_undivided: float) -> float:
    """c in k < c h^2 for an undivided spectral radius."""
    return max_stable_dt(rho_undivided)


# ══════════════════════════════════════════════════════════════════════════════
#  INTEGRATION
# ══════════════════════════════════════════════════════════════════════════════

def integrate(D: np.ndarray, f1: np.ndarray, f2: np.ndarray, k: float, t_final: float,
              observers: Sequence[Observer] = (), snapshot_times: Sequence[float] = (),
              rho: Optional[float] = None) -> Trajectory:
    """Advance v_tt = D v from (f1, f2) to t_final with step k (adjusted to hit t_final)."""
    D = np.asarray(D, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    grid = make_time_grid(t_final, k)
    k = grid.k

    if rho is None:
        rho = spectral_radius(D)
    if k * math.sqrt(rho) >= 0.99 * math.sqrt(STABILITY_LIMIT):
        logger.warning("time step k=%.4e is at or beyond the stability limit (k^2 rho = %.3f)",
                       k, k * k * rho)

    scale = max(float(np.linalg.norm(f1)), float(np.linalg.norm(f2)) * max(t_final, 1.0), 1e-300)
    limit = BLOWUP_FACTOR * scale
    wanted = sorted(set(float(t) for t in snapshot_times))
    traj = Trajectory()
    traj.times.append(0.0)
    traj.snapshots.append(f1.copy())

    Df1 = D @ f1
    Df2 = D @ f2
    v_prev = f1.copy()
    v_curr = f1 + 0.5 * k * k * Df1 + k * f2 + k ** 3 / 6.0 * Df2
    _record(traj, wanted, 1, k, v_curr)
    if grid.n_steps == 1:
        traj.final, traj.previous = v_curr, v_prev
        return traj

    for step in range(1, grid.n_steps):
        Dv = D @ v_curr
        v_next = 2.0 * v_curr + k * k * Dv + k ** 4 / 12.0 * (D @ Dv) - v_prev
        t = (step + 1) * k
        if not np.all(np.isfinite(v_next)) or np.linalg.norm(v_next) > limit:
            raise InstabilityDetectedError(
                f"solution norm exceeded {limit:.3e} at step {step + 1} (t={t:.4g}, k={k:.4e}, "
                f"k^2 rho={k * k * rho:.3f})")
        for observer in observers:
            observer(step, step * k, v_prev, v_curr, v_next)
        _record(traj, wanted, step + 1, k, v_next)
        v_prev, v_curr = v_curr, v_next

    traj.final, traj.previous = v_curr, v_prev
    return traj


def _record(traj: Trajectory, wanted: List[float], step: int, k: float, v: np.ndarray) -> None:
    t = step * k
    while wanted and wanted[0] <= t + 0.5 * k:
        wanted.pop(0)
        traj.times.append(t)
        traj.snapshots.append(v.copy())


def step_backward(D: np.ndarray, v_curr: np.ndarray, v_next: np.ndarray, k: float, n_steps: int) -> np.ndarray:
    """Run the recurrence with the roles of the two levels exchanged; returns the final level."""
    for _ in range(n_steps):
        Dv = D @ v_curr
        v_prev = 2.0 * v_curr + k * k * Dv + k ** 4 / 12.0 * (D @ Dv) - v_next
        v_next, v_curr = v_curr, v_prev
    return v_curr


class EnergyObserver:
    """Samples E = v_t^T M v_t + v^T K v with the central-difference velocity."""

    def __init__(self, mass: np.ndarray, stiffness: np.ndarray, k: float):
        self.mass = np.asarray(mass, dtype=float)
        self.stiffness = np.asarray(stiffness, dtype=float)
        self.k = k
        self.times: List[float] = []
        self.values: List[float] = []

    def __call__(self, step: int, t: float, v_prev: np.ndarray, v_curr: np.ndarray, v_next: np.ndarray) -> None:
        v_t = (v_next - v_prev) / (2.0 * self.k)
        self.times.append(t)
        self.values.append(float(v_t @ (self.mass * v_t) + v_curr @ (self.stiffness @ v_curr)))

    def relative_drift(self) -> float:
        if not self.values:
            return 0.0
        values = np.asarray(self.values)
        ref = values[0]
        spread = float(np.max(np.abs(values - ref)))
        if spread == 0.0:
            return 0.0
        return spread / abs(ref) if ref != 0 else math.inf
