"""
Assembled semi-discrete systems v_tt = D v and their energy bookkeeping.

A system carries its right-hand side D together with the mass weights M (the
diagonal of B (x) H) and, where the construction provides one, the stiffness
form K of the conserved energy E = v_t^T M v_t + v^T K v.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import RankDeficientConstraintsError

logger = logging.getLogger(__name__)

GRAM_COND_LIMIT = 1e12


@dataclass(frozen=True)
class BlockLayout:
    """Where one block's unknowns sit inside the global vector."""
    name: str
    offset: int
    m: int
    x_l: float
    x_r: float
    a: float
    b: float

    @property
    def indices(self) -> slice:
        return slice(self.offset, self.offset + self.m)


@dataclass(frozen=True)
class SemiDiscreteSystem:
    D: np.ndarray
    h: float
    layout: Tuple[BlockLayout, ...]
    method: str
    conditions: str
    order: int
    mass: np.ndarray = field(repr=False)
    stiffness: Optional[np.ndarray] = field(default=None, repr=False)
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.D.shape[0]

    @property
    def undivided(self) -> np.ndarray:
        """h^4 D, the grid-independent scaling of the right-hand side."""
        return self.h ** 4 * self.D

    def block(self, w: np.ndarray, index: int) -> np.ndarray:
        return w[self.layout[index].indices]


def freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def make_system(D: np.ndarray, h: float, layout: Tuple[BlockLayout, ...], method: str,
                conditions: str, order: int, mass: np.ndarray,
                stiffness: Optional[np.ndarray] = None,
                provenance: Optional[Dict[str, Any]] = None) -> SemiDiscreteSystem:
    logger.debug("assembled %s/%s system, n=%d", method, conditions, D.shape[0])
    return SemiDiscreteSystem(
        D=freeze(D),
        h=float(h),
        layout=layout,
        method=method,
        conditions=conditions,
        order=order,
        mass=freeze(mass),
        stiffness=None if stiffness is None else freeze(0.5 * (stiffness + stiffness.T)),
        provenance=dict(provenance or {}),
    )


# ══════════════════════════════════════════════════════════════════════════════
#  PROJECTIONS
# ══════════════════════════════════════════════════════════════════════════════

def h_orthogonal_projection(L: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """P = I - H^-1 L^T (L H^-1 L^T)^-1 L for diagonal H = diag(weights).

    Rows of L are rescaled to unit length first; this leaves P unchanged and
    keeps the Gram matrix condition number meaningful across h.
    """
    L = np.atleast_2d(np.asarray(L, dtype=float))
    norms = np.linalg.norm(L, axis=1)
    if np.any(norms == 0.0):
        raise RankDeficientConstraintsError("constraint matrix has a zero row")
    L = L / norms[:, None]
    HinvLt = L.T / weights[:, None]
    gram = L @ HinvLt
    gram = 0.5 * (gram + gram.T)
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > GRAM_COND_LIMIT:
        raise RankDeficientConstraintsError(
            f"{L.shape[0]} constraint rows are dependent (Gram condition {cond:.3e})")
    try:
        factor = linalg.cho_factor(gram)
    except linalg.LinAlgError as exc:
        raise RankDeficientConstraintsError("Gram matrix is not positive definite") from exc
    P = np.eye(L.shape[1]) - HinvLt @ linalg.cho_solve(factor, L)
    logger.debug("projection from %d constraints, Gram condition %.3e", L.shape[0], cond)
    return P


def projection_defects(P: np.ndarray, weights: np.ndarray, L: np.ndarray) -> Dict[str, float]:
    """Max-norm defects of idempotence, H-self-adjointness and LP = 0.

    LP is measured with unit-length constraint rows.
    """
    L = np.atleast_2d(L)
    L = L / np.linalg.norm(L, axis=1)[:, None]
    HP = weights[:, None] * P
    return {
        "idempotence": float(np.max(np.abs(P @ P - P))),
        "self_adjoint": float(np.max(np.abs(HP - HP.T))),
        "constraints": float(np.max(np.abs(L @ P))),
    }


# ══════════════════════════════════════════════════════════════════════════════
#  ENERGY
# ══════════════════════════════════════════════════════════════════════════════

def energy_matrix(system: SemiDiscreteSystem) -> np.ndarray:
    """K = -sym(M D): the stiffness form read off the assembled system."""
    MD = system.mass[:, None] * system.D
    return -0.5 * (MD + MD.T)


def energy_stiffness(system: SemiDiscreteSystem) -> np.ndarray:
    return system.stiffness if system.stiffness is not None else energy_matrix(system)


def energy_rate(system: SemiDiscreteSystem, w: np.ndarray, w_t: np.ndarray,
                stiffness: Optional[np.ndarray] = None) -> float:
    """dE/dt = 2 w_t^T (M D + K) w along the exact semi-discrete flow."""
    K = energy_stiffness(system) if stiffness is None else stiffness
    MD = system.mass[:, None] * system.D
    return float(2.0 * w_t @ (MD @ w + K @ w))


def eigenvalue_bounds(system: SemiDiscreteSystem) -> Tuple[float, float, float]:
    """(max Re, max |Im|, rho) of the eigenvalues of D."""
    lam = linalg.eigvals(system.D)
    rho = float(np.max(np.abs(lam))) if lam.size else 0.0
    return float(np.max(lam.real)), float(np.max(np.abs(lam.imag))), rho

