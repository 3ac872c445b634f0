"""
╔══════════════════════════════════════════════════════════════════════════════╗
║                          TWO-BLOCK INTERFACE COUPLING                         ║
║                                                                               ║
║  Continuity of u, u_x, a u_xx and a u_xxx across a material discontinuity,    ║
║  imposed by SAT, projection or hybrid SAT-projection, and the periodic ring   ║
║  with interfaces at x = 0 and x = +-1.                                        ║
╚══════════════════════════════════════════════════════════════════════════════╝

The global vector is w = [v1; v2]. An interface always joins the right end of
its "left" block to the left end of its "right" block; the ring's wrap-around
interface is built with the blocks exchanged and permuted back.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from .boundary_closure import Method
from .errors import IncompatibleSpecError, InfeasibleAlphasError
from .sbp_core import (AlphaPair, Grid, SbpOperatorSet, build_grid, build_sbp_d4, is_feasible,
                       default_alphas, load_operator_table, n_tilde)
from .system import BlockLayout, SemiDiscreteSystem, h_orthogonal_projection, make_system

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlockConfig:
    grid: Grid
    a: float
    b: float
    ops: SbpOperatorSet

    @property
    def m(self) -> int:
        return self.grid.m


def make_block(order: int, x_l: float, x_r: float, m: int, a: float, b: float) -> BlockConfig:
    if a <= 0 or b <= 0:
        raise IncompatibleSpecError(f"block coefficients must be positive, got a={a}, b={b}")
    grid = build_grid(x_l, x_r, m)
    return BlockConfig(grid=grid, a=float(a), b=float(b), ops=build_sbp_d4(order, grid))


@dataclass(frozen=True)
class InterfaceSpec:
    method: Method
    alphas: Optional[AlphaPair] = None


def interface_tau_sigma(a1: float, a2: float, alphas: AlphaPair) -> Tuple[float, float]:
    """tau = (a1 + a2) / (4 alpha_III), sigma = (a1 + a2) / (4 alpha_II)."""
    return (a1 + a2) / (4.0 * alphas.alpha_III), (a1 + a2) / (4.0 * alphas.alpha_II)


def _check_pair(left: BlockConfig, right: BlockConfig) -> None:
    if left.ops.order != right.ops.order:
        raise IncompatibleSpecError("both blocks must use the same operator order")
    if left.m != right.m or not np.isclose(left.grid.h, right.grid.h, rtol=1e-12):
        raise IncompatibleSpecError("both blocks must share m and h")


def _blocks(top_left, top_right, bottom_left, bottom_right) -> np.ndarray:
    return np.block([[top_left, top_right], [bottom_left, bottom_right]])


def _hinv(ops: SbpOperatorSet, M: np.ndarray) -> np.ndarray:
    return M / ops.norm_weights[:, None]


# ══════════════════════════════════════════════════════════════════════════════
#  SAT
# ══════════════════════════════════════════════════════════════════════════════

def _sat_moments(left: BlockConfig, right: BlockConfig) -> np.ndarray:
    """Penalties on a u_xx and a u_xxx (the third and fourth interface conditions)."""
    L, R = left.ops, right.ops
    a1, a2 = left.a, right.a
    third = _blocks(
        -0.5 * a1 * _hinv(L, np.outer(L.d1_r, L.d2_r)), -0.5 * a2 * _hinv(L, np.outer(L.d1_r, R.d2_l)),
        0.5 * a1 * _hinv(R, np.outer(R.d1_l, L.d2_r)), 0.5 * a2 * _hinv(R, np.outer(R.d1_l, R.d2_l)),
    )
    fourth = _blocks(
        0.5 * a1 * _hinv(L, np.outer(L.e_r, L.d3_r)), 0.5 * a2 * _hinv(L, np.outer(L.e_r, R.d3_l)),
        0.5 * a1 * _hinv(R, np.outer(R.e_l, L.d3_r)), 0.5 * a2 * _hinv(R, np.outer(R.e_l, R.d3_l)),
    )
    return third + fourth


def sat_interface(left: BlockConfig, right: BlockConfig, alphas: AlphaPair) -> np.ndarray:
    """Sum of the four interface penalty blocks acting on w = [v1; v2]."""
    _check_pair(left, right)
    for block in (left, right):
        if not is_feasible(block.ops, alphas):
            raise InfeasibleAlphasError(
                f"alphas {alphas.as_tuple()} leave N-tilde indefinite for order {block.ops.order}")
    L, R = left.ops, right.ops
    a1, a2 = left.a, right.a
    h = L.h
    tau, sigma = interface_tau_sigma(a1, a2, alphas)

    g1 = tau / h ** 3 * L.e_r + 0.5 * a1 * L.d3_r
    g2 = tau / h ** 3 * R.e_l + 0.5 * a2 * R.d3_l
    values = _blocks(
        -_hinv(L, np.outer(g1, L.e_r)), _hinv(L, np.outer(g1, R.e_l)),
        _hinv(R, np.outer(g2, L.e_r)), -_hinv(R, np.outer(g2, R.e_l)),
    )
    s1 = sigma / h * L.d1_r - 0.5 * a1 * L.d2_r
    s2 = sigma / h * R.d1_l + 0.5 * a2 * R.d2_l
    slopes = _blocks(
        -_hinv(L, np.outer(s1, L.d1_r)), -_hinv(L, np.outer(s1, R.d1_l)),
        -_hinv(R, np.outer(s2, L.d1_r)), -_hinv(R, np.outer(s2, R.d1_l)),
    )
    return values + slopes + _sat_moments(left, right)


def interface_sat_energy_matrices(left: BlockConfig, right: BlockConfig,
                                  alphas: AlphaPair) -> Tuple[np.ndarray, np.ndarray]:
    """Weights A1, A2 of the interface energy on (e_r v1, d3_r v1, e_l v2, d3_l v2)
    and (d1_r v1, d2_r v1, d1_l v2, d2_l v2)."""
    a1, a2 = left.a, right.a
    h = left.grid.h
    tau, sigma = interface_tau_sigma(a1, a2, alphas)
    t, s = tau / h ** 3, sigma / h
    A1 = np.array([
        [t, 0.5 * a1, -t, -0.5 * a2],
        [0.5 * a1, a1 * h ** 3 * alphas.alpha_III, -0.5 * a1, 0.0],
        [-t, -0.5 * a1, t, 0.5 * a2],
        [-0.5 * a2, 0.0, 0.5 * a2, a2 * h ** 3 * alphas.alpha_III],
    ])
    A2 = np.array([
        [s, -0.5 * a1, s, 0.5 * a2],
        [-0.5 * a1, a1 * h * alphas.alpha_II, -0.5 * a1, 0.0],
        [s, -0.5 * a1, s, 0.5 * a2],
        [0.5 * a2, 0.0, 0.5 * a2, a2 * h * alphas.alpha_II],
    ])
    return A1, A2


def _energy_rows(left: BlockConfig, right: BlockConfig) -> Tuple[np.ndarray, np.ndarray]:
    L, R = left.ops, right.ops
    z = np.zeros(left.m)
    W1 = np.vstack([
        np.concatenate([L.e_r, z]), np.concatenate([L.d3_r, z]),
        np.concatenate([z, R.e_l]), np.concatenate([z, R.d3_l]),
    ])
    W2 = np.vstack([
        np.concatenate([L.d1_r, z]), np.concatenate([L.d2_r, z]),
        np.concatenate([z, R.d1_l]), np.concatenate([z, R.d2_l]),
    ])
    return W1, W2


def interface_sat_stiffness(left: BlockConfig, right: BlockConfig, alphas: AlphaPair) -> np.ndarray:
    """Interface part of the SAT energy, W1^T A1 W1 + W2^T A2 W2."""
    A1, A2 = interface_sat_energy_matrices(left, right, alphas)
    W1, W2 = _energy_rows(left, right)
    return W1.T @ A1 @ W1 + W2.T @ A2 @ W2


# ══════════════════════════════════════════════════════════════════════════════
#  PROJECTION AND HYBRID
# ══════════════════════════════════════════════════════════════════════════════

def interface_constraints(left: BlockConfig, right: BlockConfig, rows: int = 4) -> np.ndarray:
    """First ``rows`` interface conditions as a (rows x 2m) matrix L."""
    if rows not in (2, 4):
        raise IncompatibleSpecError(f"interface constraints come in 2 or 4 rows, got {rows}")
    L, R = left.ops, right.ops
    stacked = [
        np.concatenate([L.e_r, -R.e_l]),
        np.concatenate([L.d1_r, R.d1_l]),
        np.concatenate([left.a * L.d2_r, right.a * R.d2_l]),
        np.concatenate([left.a * L.d3_r, right.a * R.d3_l]),
    ]
    return np.vstack(stacked[:rows])


def _joint_weights(left: BlockConfig, right: BlockConfig) -> np.ndarray:
    return np.concatenate([left.ops.norm_weights, right.ops.norm_weights])


def projection_interface(left: BlockConfig, right: BlockConfig) -> np.ndarray:
    _check_pair(left, right)
    return h_orthogonal_projection(interface_constraints(left, right, 4), _joint_weights(left, right))


def hybrid_interface(left: BlockConfig, right: BlockConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Projection for u and u_x continuity plus the projected moment penalties."""
    _check_pair(left, right)
    P = h_orthogonal_projection(interface_constraints(left, right, 2), _joint_weights(left, right))
    return P, P @ _sat_moments(left, right) @ P


# ══════════════════════════════════════════════════════════════════════════════
#  RING
# ══════════════════════════════════════════════════════════════════════════════

def _swap_permutation(m: int) -> np.ndarray:
    return np.concatenate([np.arange(m, 2 * m), np.arange(m)])


def _unswap_matrix(M: np.ndarray, m: int) -> np.ndarray:
    """Matrix built on [v2; v1] expressed on [v1; v2]."""
    perm = _swap_permutation(m)
    out = np.empty_like(M)
    out[np.ix_(perm, perm)] = M
    return out


def _unswap_rows(L: np.ndarray, m: int) -> np.ndarray:
    out = np.empty_like(L)
    out[:, _swap_permutation(m)] = L
    return out


def ring_constraints(block1: BlockConfig, block2: BlockConfig, rows: int) -> np.ndarray:
    """Constraint rows of both ring interfaces, x = 0 first."""
    at_zero = interface_constraints(block1, block2, rows)
    at_wrap = _unswap_rows(interface_constraints(block2, block1, rows), block1.m)
    return np.vstack([at_zero, at_wrap])


def assemble_ring(block1: BlockConfig, block2: BlockConfig, spec: InterfaceSpec) -> SemiDiscreteSystem:
    """Periodic two-block beam, block1 on [-1, 0] and block2 on [0, 1]."""
    _check_pair(block1, block2)
    method = Method(spec.method)
    o1, o2 = block1.ops, block2.ops
    m = block1.m
    weights = _joint_weights(block1, block2)
    inv_b = np.concatenate([np.full(m, 1.0 / block1.b), np.full(m, 1.0 / block2.b)])
    stiff_op = linalg.block_diag(block1.a * o1.D4, block2.a * o2.D4)
    provenance = {"data_version": o1.data_version, "a": (block1.a, block2.a), "b": (block1.b, block2.b)}

    if method is Method.SAT:
        alphas = spec.alphas if spec.alphas is not None else default_alphas(o1.order)
        penalties = (sat_interface(block1, block2, alphas)
                     + _unswap_matrix(sat_interface(block2, block1, alphas), m))
        rhs = -stiff_op + penalties
        stiffness = (linalg.block_diag(block1.a * n_tilde(o1, alphas), block2.a * n_tilde(o2, alphas))
                     + interface_sat_stiffness(block1, block2, alphas)
                     + _unswap_matrix(interface_sat_stiffness(block2, block1, alphas), m))
        tau, sigma = interface_tau_sigma(block1.a, block2.a, alphas)
        provenance.update(alpha_II=alphas.alpha_II, alpha_III=alphas.alpha_III, tau=tau, sigma=sigma)
    else:
        rows = 4 if method is Method.PROJECTION else 2
        P = h_orthogonal_projection(ring_constraints(block1, block2, rows), weights)
        rhs = -P @ stiff_op @ P
        if method is Method.HYBRID:
            moments = _sat_moments(block1, block2) + _unswap_matrix(_sat_moments(block2, block1), m)
            rhs = rhs + P @ moments @ P
        stiffness = P.T @ linalg.block_diag(block1.a * o1.N, block2.a * o2.N) @ P

    layout = (
        BlockLayout("block1", 0, m, block1.grid.x_l, block1.grid.x_r, block1.a, block1.b),
        BlockLayout("block2", m, m, block2.grid.x_l, block2.grid.x_r, block2.a, block2.b),
    )
    logger.info("order %d %s ring, m=%d per block", o1.order, method.value, m)
    return make_system(inv_b[:, None] * rhs, o1.h, layout, method.value, "ring", o1.order,
                       mass=weights / inv_b, stiffness=stiffness, provenance=provenance)


# ══════════════════════════════════════════════════════════════════════════════
#  PERIODIC REFERENCE
# ══════════════════════════════════════════════════════════════════════════════

def periodic_d4(order: int, n: int, length: float = 2.0, a: float = 1.0, b: float = 1.0) -> np.ndarray:
    """-(a/b) D4 on a periodic grid of n points, using the interior stencil only."""
    stencil = np.array([float(c) for c in load_operator_table(order).stencil])
    half = len(stencil) // 2
    if n <= 2 * half:
        raise IncompatibleSpecError(f"periodic grid needs more than {2 * half} points")
    h = length / n
    column = np.zeros(n)
    for offset, coeff in zip(range(-half, half + 1), stencil):
        column[offset % n] += coeff
    C = linalg.circulant(column)
    return -(a / b) * C / h ** 4
