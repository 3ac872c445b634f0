"""
╔══════════════════════════════════════════════════════════════════════════════╗
║                       SINGLE-BLOCK BOUNDARY CLOSURES                          ║
║                                                                               ║
║  Clamped (u = u_x = 0) and free (u_xx = u_xxx = 0) beam ends imposed by       ║
║  penalty terms (SAT) or by an H-orthogonal projection.                        ║
╚══════════════════════════════════════════════════════════════════════════════╝
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from .errors import IncompatibleSpecError, InfeasibleAlphasError
from .sbp_core import AlphaPair, SbpOperatorSet, default_alphas, is_feasible
from .system import BlockLayout, SemiDiscreteSystem, h_orthogonal_projection, make_system

logger = logging.getLogger(__name__)


class BCKind(str, Enum):
    CLAMPED = "clamped"
    FREE = "free"


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class Method(str, Enum):
    SAT = "sat"
    PROJECTION = "projection"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class BoundaryCondition:
    kind: BCKind
    side: Side

    @classmethod
    def of(cls, kind: str, side: str) -> "BoundaryCondition":
        return cls(BCKind(kind), Side(side))


@dataclass(frozen=True)
class EnforcementSpec:
    """How boundary conditions are imposed.

    ``alphas`` only matters for clamped ends under SAT; when omitted the
    standard alphas of the operator order are used.
    """
    method: Method
    alphas: Optional[AlphaPair] = None

    def resolved_alphas(self, order: int) -> AlphaPair:
        return self.alphas if self.alphas is not None else default_alphas(order)


def clamped_penalties(alphas: AlphaPair) -> tuple:
    """(tau, sigma) = (1/alpha_III, 1/alpha_II)."""
    return 1.0 / alphas.alpha_III, 1.0 / alphas.alpha_II


# ══════════════════════════════════════════════════════════════════════════════
#  SAT
# ══════════════════════════════════════════════════════════════════════════════

def sat_clamped_closure(ops: SbpOperatorSet, a: float, alphas: AlphaPair, side: Side) -> np.ndarray:
    """Penalty matrix imposing u = u_x = 0 at one end.

    Left:  -a H^-1 [(d3_l + tau h^-3 e_l) e_l^T + (d2_l + sigma h^-1 d1_l) d1_l^T]
    Right: -a H^-1 [(d3_r + tau h^-3 e_r) e_r^T + (-d2_r + sigma h^-1 d1_r) d1_r^T]
    """
    if not is_feasible(ops, alphas):
        raise InfeasibleAlphasError(
            f"alphas {alphas.as_tuple()} leave N-tilde indefinite for order {ops.order}")
    tau, sigma = clamped_penalties(alphas)
    h = ops.h
    if Side(side) is Side.LEFT:
        e, d1, d2, d3 = ops.e_l, ops.d1_l, ops.d2_l, ops.d3_l
    else:
        e, d1, d2, d3 = ops.e_r, ops.d1_r, -ops.d2_r, ops.d3_r
    B = np.outer(d3 + tau / h ** 3 * e, e) + np.outer(d2 + sigma / h * d1, d1)
    return -a * B / ops.norm_weights[:, None]


def sat_free_closure(ops: SbpOperatorSet, a: float, side: Side) -> np.ndarray:
    """Penalty matrix imposing u_xx = u_xxx = 0 at one end (tau = sigma = 1)."""
    if Side(side) is Side.LEFT:
        B = np.outer(ops.d1_l, ops.d2_l) + np.outer(ops.e_l, ops.d3_l)
    else:
        B = -np.outer(ops.d1_r, ops.d2_r) + np.outer(ops.e_r, ops.d3_r)
    return a * B / ops.norm_weights[:, None]


def clamped_sat_energy_matrix(h: float, alphas: AlphaPair) -> np.ndarray:
    """4x4 boundary energy weight acting on (e^T v, d3^T v, d1^T v, +-d2^T v)."""
    tau, sigma = clamped_penalties(alphas)
    return np.array([
        [tau / h ** 3, 1.0, 0.0, 0.0],
        [1.0, h ** 3 * alphas.alpha_III, 0.0, 0.0],
        [0.0, 0.0, sigma / h, 1.0],
        [0.0, 0.0, 1.0, h * alphas.alpha_II],
    ])


def _clamped_energy_rows(ops: SbpOperatorSet, side: Side) -> np.ndarray:
    if side is Side.LEFT:
        return np.vstack([ops.e_l, ops.d3_l, ops.d1_l, ops.d2_l])
    return np.vstack([ops.e_r, ops.d3_r, ops.d1_r, -ops.d2_r])


def _sat_stiffness(ops: SbpOperatorSet, a: float, conditions: Sequence[BoundaryCondition],
                   alphas: AlphaPair) -> np.ndarray:
    """a (N-tilde + boundary terms) with the alpha split taken only at clamped ends."""
    K = ops.N.copy()
    for bc in conditions:
        if bc.kind is not BCKind.CLAMPED:
            continue
        if bc.side is Side.LEFT:
            d2, d3 = ops.d2_l, ops.d3_l
        else:
            d2, d3 = ops.d2_r, ops.d3_r
        K -= ops.h * alphas.alpha_II * np.outer(d2, d2) + ops.h ** 3 * alphas.alpha_III * np.outer(d3, d3)
        W = _clamped_energy_rows(ops, bc.side)
        K += W.T @ clamped_sat_energy_matrix(ops.h, alphas) @ W
    return a * K


# ══════════════════════════════════════════════════════════════════════════════
#  PROJECTION
# ══════════════════════════════════════════════════════════════════════════════

def boundary_constraints(ops: SbpOperatorSet, bcs: Sequence[BoundaryCondition]) -> np.ndarray:
    """Stacked rows of L: (e, d1) for clamped ends and (d2, d3) for free ends."""
    rows: List[np.ndarray] = []
    for bc in bcs:
        left = Side(bc.side) is Side.LEFT
        if BCKind(bc.kind) is BCKind.CLAMPED:
            rows += [ops.e_l, ops.d1_l] if left else [ops.e_r, ops.d1_r]
        else:
            rows += [ops.d2_l, ops.d3_l] if left else [ops.d2_r, ops.d3_r]
    return np.vstack(rows)


def projection_boundary(ops: SbpOperatorSet, bcs: Sequence[BoundaryCondition]) -> np.ndarray:
    """H-orthogonal projection onto {v : L v = 0}."""
    if not bcs:
        raise IncompatibleSpecError("projection needs at least one boundary condition")
    return h_orthogonal_projection(boundary_constraints(ops, bcs), ops.norm_weights)


# ══════════════════════════════════════════════════════════════════════════════
#  ASSEMBLY
# ══════════════════════════════════════════════════════════════════════════════

def assemble_single_block(ops: SbpOperatorSet, a: float, b: float,
                          bc_left: BoundaryCondition, bc_right: BoundaryCondition,
                          spec: EnforcementSpec) -> SemiDiscreteSystem:
    """Right-hand side of b v_tt = -a D4 v + closures for one block."""
    if a <= 0 or b <= 0:
        raise IncompatibleSpecError(f"need a > 0 and b > 0, got a={a}, b={b}")
    if Side(bc_left.side) is not Side.LEFT or Side(bc_right.side) is not Side.RIGHT:
        raise IncompatibleSpecError("boundary conditions must be given as (left, right)")
    method = Method(spec.method)
    bcs = (bc_left, bc_right)
    conditions = f"{bc_left.kind.value}-{bc_right.kind.value}"
    layout = (BlockLayout("block", 0, ops.m, ops.grid.x_l, ops.grid.x_r, a, b),)
    provenance = {"data_version": ops.data_version, "a": a, "b": b}

    if method is Method.SAT:
        alphas = spec.resolved_alphas(ops.order)
        closure = np.zeros_like(ops.D4)
        for bc in bcs:
            if bc.kind is BCKind.CLAMPED:
                closure += sat_clamped_closure(ops, a, alphas, bc.side)
            else:
                closure += sat_free_closure(ops, a, bc.side)
        D = (-a * ops.D4 + closure) / b
        stiffness = _sat_stiffness(ops, a, bcs, alphas)
        if any(bc.kind is BCKind.CLAMPED for bc in bcs):
            tau, sigma = clamped_penalties(alphas)
            provenance.update(alpha_II=alphas.alpha_II, alpha_III=alphas.alpha_III, tau=tau, sigma=sigma)
        else:
            provenance.update(tau=1.0, sigma=1.0)
    elif method is Method.PROJECTION:
        P = projection_boundary(ops, bcs)
        D = -a * (P @ ops.D4 @ P) / b
        stiffness = a * (P.T @ ops.N @ P)
    else:
        raise IncompatibleSpecError("hybrid enforcement applies to interfaces only")

    logger.info("order %d %s %s single block, m=%d", ops.order, method.value, conditions, ops.m)
    return make_system(D, ops.h, layout, method.value, conditions, ops.order,
                       mass=b * ops.norm_weights, stiffness=stiffness, provenance=provenance)
