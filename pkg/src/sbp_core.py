"""
╔══════════════════════════════════════════════════════════════════════════════╗
║                      FOURTH-DERIVATIVE SBP OPERATORS                          ║
║                                                                               ║
║  Uniform grids, diagonal-norm narrow-stencil D4 operators of order 2, 4, 6,   ║
║  the N-decomposition and the (alpha_II, alpha_III) feasibility machinery.     ║
╚══════════════════════════════════════════════════════════════════════════════╝

Every operator set satisfies

    H D4 = N + e_l d3_l^T + d1_l d2_l^T + e_r d3_r^T - d1_r d2_r^T

with H diagonal positive and N symmetric positive semi-definite. The boundary
vectors use the sign convention d_k;l ~ -(d/dx)^k at x_l and d_k;r ~ (d/dx)^k at
x_r for k = 1, 2, 3.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import (
    BisectionFailureError,
    GridTooSmallError,
    InvalidDomainError,
    OperatorDataError,
    TooFewPointsError,
    UnsupportedOrderError,
)

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
SUPPORTED_ORDERS = (2, 4, 6)

# Standard alphas of the tabulated operators; the default weights of every SAT closure.
REFERENCE_ALPHAS: Dict[int, Tuple[float, float]] = {
    2: (0.625, 0.200),
    4: (0.274, 0.544),
    6: (0.161, 0.078),
}

PSD_TOL = 1e-10
ALPHA_BRACKET = (0.0, 10.0)
ALPHA_MAX_ITER = 60
ALPHA_ABS_TOL = 1e-4


# ══════════════════════════════════════════════════════════════════════════════
#  GRID
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Grid:
    """Uniform grid x_i = x_l + (i-1) h, i = 1..m."""
    x_l: float
    x_r: float
    m: int

    @property
    def h(self) -> float:
        return (self.x_r - self.x_l) / (self.m - 1)

    @property
    def points(self) -> np.ndarray:
        x = self.x_l + np.arange(self.m) * self.h
        x[0] = self.x_l
        x[-1] = self.x_r
        return x


def build_grid(x_l: float, x_r: float, m: int) -> Grid:
    """Build a uniform grid with m points on [x_l, x_r]."""
    if not x_r > x_l:
        raise InvalidDomainError(f"invalid domain [{x_l}, {x_r}]: need x_r > x_l")
    if m < 2:
        raise TooFewPointsError(f"grid needs at least 2 points, got m={m}")
    return Grid(float(x_l), float(x_r), int(m))


# ══════════════════════════════════════════════════════════════════════════════
#  COEFFICIENT DATA
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class OperatorTable:
    """Left-boundary coefficient data of one operator order, in units of h = 1."""
    order: int
    version: str
    source: str
    closure_width: int
    boundary_degree: int
    norm: Tuple[Fraction, ...]
    stencil: Tuple[Fraction, ...]
    d1: Tuple[Fraction, ...]
    d2: Tuple[Fraction, ...]
    d3: Tuple[Fraction, ...]
    core: Tuple[Tuple[Fraction, ...], ...] = ()
    interior_weights: Tuple[Fraction, ...] = ()

    @property
    def is_published(self) -> bool:
        return self.source == "published"


def _parse_numbers(text: str, path: Path) -> Tuple[Fraction, ...]:
    try:
        return tuple(Fraction(tok) for tok in text.split())
    except ValueError as exc:
        raise OperatorDataError(f"{path.name}: bad number in '{text}'") from exc


@functools.lru_cache(maxsize=None)
def load_operator_table(order: int) -> OperatorTable:
    """Read the coefficient table of the given order from the data directory."""
    if order not in SUPPORTED_ORDERS:
        raise UnsupportedOrderError(f"order {order} not in {SUPPORTED_ORDERS}")
    path = DATA_DIR / f"d4_order{order}.txt"
    entries: Dict[str, str] = {}
    core: List[Tuple[Fraction, ...]] = []
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise OperatorDataError(f"{path.name}: cannot parse line '{raw}'")
        key, value = key.strip(), value.strip()
        if key == "core_row":
            core.append(_parse_numbers(value, path))
        else:
            entries[key] = value

    required = ("version", "order", "source", "closure_width", "boundary_degree",
                "norm", "stencil", "d1", "d2", "d3")
    missing = [k for k in required if k not in entries]
    if missing:
        raise OperatorDataError(f"{path.name}: missing keys {missing}")
    if int(entries["order"]) != order:
        raise OperatorDataError(f"{path.name}: declares order {entries['order']}")

    table = OperatorTable(
        order=order,
        version=entries["version"],
        source=entries["source"],
        closure_width=int(entries["closure_width"]),
        boundary_degree=int(entries["boundary_degree"]),
        norm=_parse_numbers(entries["norm"], path),
        stencil=_parse_numbers(entries["stencil"], path),
        d1=_parse_numbers(entries["d1"], path),
        d2=_parse_numbers(entries["d2"], path),
        d3=_parse_numbers(entries["d3"], path),
        core=tuple(core),
        interior_weights=_parse_numbers(entries.get("interior_weights", ""), path),
    )
    if table.is_published and len(core) != table.closure_width:
        raise OperatorDataError(f"{path.name}: core block must have {table.closure_width} rows")
    if not table.is_published and not table.interior_weights:
        raise OperatorDataError(f"{path.name}: constructed closure needs interior_weights")
    if len(table.stencil) != order + 3:
        raise OperatorDataError(f"{path.name}: narrow stencil must have {order + 3} entries")
    return table


def operator_data_version(order: int) -> str:
    table = load_operator_table(order)
    return f"d4_order{order}@{table.version}/{table.source}"


# ══════════════════════════════════════════════════════════════════════════════
#  CLOSURE CONSTRUCTION
# ══════════════════════════════════════════════════════════════════════════════

def second_difference_matrix(m: int) -> np.ndarray:
    """(m-2) x m matrix of undivided interior second differences."""
    S = np.zeros((m - 2, m))
    rows = np.arange(m - 2)
    S[rows, rows] = 1.0
    S[rows, rows + 1] = -2.0
    S[rows, rows + 2] = 1.0
    return S


def interior_weight_matrix(n: int, weights: Tuple[Fraction, ...]) -> np.ndarray:
    """W = sum_k w_k (G^T G)^k with G the (n-1) x n first differences."""
    GtG = np.diag(np.full(n, 2.0)) - np.eye(n, k=1) - np.eye(n, k=-1)
    GtG[0, 0] = GtG[-1, -1] = 1.0
    W = np.zeros((n, n))
    power = np.eye(n)
    for w in weights:
        W += float(w) * power
        power = power @ GtG
    return W


def _padded(values: Tuple[Fraction, ...], length: int) -> np.ndarray:
    out = np.zeros(length)
    out[: len(values)] = [float(v) for v in values]
    return out


def _closure_for_degree(table: OperatorTable, degree: int) -> Optional[np.ndarray]:
    """Boundary block of W making the left rows of D4 exact up to ``degree``.

    Works on a truncated half-line with h = 1. Returns None when the data does
    not admit a symmetric positive semi-definite block for this degree.
    """
    width = table.closure_width
    length = 4 * width + 12
    x = np.arange(length, dtype=float)
    S = second_difference_matrix(length)
    W_int = interior_weight_matrix(length - 2, table.interior_weights)
    norm = np.ones(length)
    norm[: len(table.norm)] = [float(v) for v in table.norm]
    d1, d2, d3 = (_padded(d, length) for d in (table.d1, table.d2, table.d3))
    e_l = np.zeros(length)
    e_l[0] = 1.0

    # rows far from the boundary must already be exact, away from the cut at the far end
    check = slice(width, length - 2 - 2 * len(table.interior_weights) - 2)
    P_cols, delta_cols = [], []
    for k in range(2, degree + 1):
        u = x ** k
        u4 = float(k * (k - 1) * (k - 2) * (k - 3)) * x ** max(k - 4, 0) if k >= 4 else np.zeros(length)
        g = norm * u4 - e_l * (d3 @ u) - d1 * (d2 @ u)
        # S^T y = g on the left rows is solved by a double cumulative sum
        y = np.cumsum(np.cumsum(g))[: length - 2]
        p = S @ u
        delta = y - W_int @ p
        scale = max(1.0, np.max(np.abs(y[: 2 * width])))
        if np.max(np.abs(delta[check])) > 1e-9 * scale:
            logger.debug("order %d: degree-%d conditions not local, rejecting", table.order, k)
            return None
        P_cols.append(p[:width])
        delta_cols.append(delta[:width])

    P = np.column_stack(P_cols)
    Delta = np.column_stack(delta_cols)
    G = P.T @ Delta
    if np.max(np.abs(G - G.T)) > 1e-9 * max(1.0, np.max(np.abs(G))):
        logger.debug("order %d: degree-%d moment matrix not symmetric", table.order, degree)
        return None
    try:
        factor = linalg.cho_factor(0.5 * (G + G.T))
    except linalg.LinAlgError:
        logger.debug("order %d: degree-%d moment matrix not positive definite", table.order, degree)
        return None
    block = Delta @ linalg.cho_solve(factor, Delta.T)
    return 0.5 * (block + block.T)


@functools.lru_cache(maxsize=None)
def construct_closure(order: int) -> Tuple[np.ndarray, int]:
    """Boundary block of W and the boundary degree it achieves."""
    table = load_operator_table(order)
    for degree in range(table.boundary_degree, 1, -1):
        block = _closure_for_degree(table, degree)
        if block is not None:
            if degree < table.boundary_degree:
                logger.warning("order %d closure exact only up to degree %d (wanted %d)",
                               order, degree, table.boundary_degree)
            block.setflags(write=False)
            return block, degree
    raise OperatorDataError(f"order {order}: no positive closure satisfies the boundary conditions")


def _unit_core_matrix(table: OperatorTable, m: int) -> Tuple[np.ndarray, int]:
    """N for h = 1 and the boundary degree of the closure."""
    if table.is_published:
        N = np.zeros((m, m))
        stencil = np.array([float(c) for c in table.stencil])
        half = len(stencil) // 2
        for i in range(m):
            lo, hi = max(0, i - half), min(m, i + half + 1)
            N[i, lo:hi] = stencil[lo - i + half: hi - i + half]
        core = np.array([[float(c) for c in row] for row in table.core])
        w = table.closure_width
        N[:w, :w] = core
        N[m - w:, m - w:] = core[::-1, ::-1]
        return N, table.boundary_degree

    block, degree = construct_closure(table.order)
    n = m - 2
    W = interior_weight_matrix(n, table.interior_weights)
    w = block.shape[0]
    W[:w, :w] += block
    W[n - w:, n - w:] += block[::-1, ::-1]
    S = second_difference_matrix(m)
    return S.T @ W @ S, degree


# ══════════════════════════════════════════════════════════════════════════════
#  OPERATOR SET
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class AlphaPair:
    """Weights of the boundary terms split off N."""
    alpha_II: float
    alpha_III: float

    def as_tuple(self) -> Tuple[float, float]:
        return (self.alpha_II, self.alpha_III)


@dataclass(frozen=True)
class SbpOperatorSet:
    order: int
    grid: Grid
    H: np.ndarray
    D4: np.ndarray
    N: np.ndarray
    e_l: np.ndarray
    e_r: np.ndarray
    d1_l: np.ndarray
    d1_r: np.ndarray
    d2_l: np.ndarray
    d2_r: np.ndarray
    d3_l: np.ndarray
    d3_r: np.ndarray
    boundary_degree: int
    data_version: str
    norm_weights: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.grid.m

    @property
    def h(self) -> float:
        return self.grid.h

    def boundary_matrix(self) -> np.ndarray:
        """e_l d3_l^T + d1_l d2_l^T + e_r d3_r^T - d1_r d2_r^T."""
        return (np.outer(self.e_l, self.d3_l) + np.outer(self.d1_l, self.d2_l)
                + np.outer(self.e_r, self.d3_r) - np.outer(self.d1_r, self.d2_r))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def minimum_points(order: int) -> int:
    return 2 * load_operator_table(order).closure_width + 1


def build_sbp_d4(order: int, grid: Grid) -> SbpOperatorSet:
    """Build the 2p-th order diagonal-norm fourth-derivative SBP operator on ``grid``."""
    table = load_operator_table(order)
    m, h = grid.m, grid.h
    if m < minimum_points(order):
        raise GridTooSmallError(
            f"order {order} needs m >= {minimum_points(order)} for disjoint closures, got m={m}")

    weights = np.ones(m)
    nb = len(table.norm)
    weights[:nb] = [float(v) for v in table.norm]
    weights[m - nb:] = weights[:nb][::-1]
    weights *= h

    def left(values: Tuple[Fraction, ...], power: int) -> np.ndarray:
        return _padded(values, m) / h ** power

    e_l = np.zeros(m)
    e_l[0] = 1.0
    d1_l, d2_l, d3_l = left(table.d1, 1), left(table.d2, 2), left(table.d3, 3)
    # mirror image: odd derivatives keep the vector, even ones flip sign
    e_r, d1_r, d2_r, d3_r = e_l[::-1], d1_l[::-1], -d2_l[::-1], d3_l[::-1]

    N_unit, degree = _unit_core_matrix(table, m)
    N = N_unit / h ** 3
    N = 0.5 * (N + N.T)

    boundary = (np.outer(e_l, d3_l) + np.outer(d1_l, d2_l)
                + np.outer(e_r, d3_r) - np.outer(d1_r, d2_r))
    D4 = (N + boundary) / weights[:, None]

    logger.debug("built order-%d D4 on m=%d, h=%.3e (%s)", order, m, h, table.source)
    return SbpOperatorSet(
        order=order,
        grid=grid,
        H=_frozen(np.diag(weights)),
        D4=_frozen(D4),
        N=_frozen(N),
        e_l=_frozen(e_l),
        e_r=_frozen(e_r),
        d1_l=_frozen(d1_l),
        d1_r=_frozen(d1_r),
        d2_l=_frozen(d2_l),
        d2_r=_frozen(d2_r),
        d3_l=_frozen(d3_l),
        d3_r=_frozen(d3_r),
        boundary_degree=degree,
        data_version=operator_data_version(order),
        norm_weights=_frozen(weights),
    )


# ══════════════════════════════════════════════════════════════════════════════
#  N-DECOMPOSITION AND FEASIBILITY
# ══════════════════════════════════════════════════════════════════════════════

def min_eigenvalue(A: np.ndarray) -> float:
    """Smallest eigenvalue of the symmetrized matrix."""
    return float(linalg.eigvalsh(0.5 * (A + A.T))[0])


def is_psd(A: np.ndarray, tol: float = PSD_TOL, scale: Optional[float] = None) -> bool:
    if scale is None:
        scale = np.max(np.abs(A))
    return min_eigenvalue(A) >= -tol * max(1.0, scale)


def _second_terms(ops: SbpOperatorSet) -> np.ndarray:
    return ops.h * (np.outer(ops.d2_l, ops.d2_l) + np.outer(ops.d2_r, ops.d2_r))


def _third_terms(ops: SbpOperatorSet) -> np.ndarray:
    return ops.h ** 3 * (np.outer(ops.d3_l, ops.d3_l) + np.outer(ops.d3_r, ops.d3_r))


def n_tilde(ops: SbpOperatorSet, alphas: AlphaPair) -> np.ndarray:
    """N - h a_II (d2 d2^T terms) - h^3 a_III (d3 d3^T terms)."""
    Nt = ops.N - alphas.alpha_II * _second_terms(ops) - alphas.alpha_III * _third_terms(ops)
    return 0.5 * (Nt + Nt.T)


def is_feasible(ops: SbpOperatorSet, alphas: AlphaPair, tol: float = PSD_TOL) -> bool:
    """True iff N-tilde is positive semi-definite within ``tol`` relative to N."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    scale = max(1.0, float(np.linalg.norm(ops.N, 2)))
    return min_eigenvalue(n_tilde(ops, alphas)) >= -tol * scale


def _largest_alpha(ops: SbpOperatorSet, terms: np.ndarray, label: str) -> float:
    half_N = 0.5 * ops.N
    scale = max(1.0, float(np.linalg.norm(ops.N, 2)))

    def feasible(alpha: float) -> bool:
        return min_eigenvalue(half_N - alpha * terms) >= -PSD_TOL * scale

    lo, hi = ALPHA_BRACKET
    if feasible(hi):
        raise BisectionFailureError(f"{label}: still feasible at bracket end {hi}")
    if not feasible(ALPHA_ABS_TOL):
        raise BisectionFailureError(f"{label}: no positive feasible value for order {ops.order}")
    for _ in range(ALPHA_MAX_ITER):
        if hi - lo < ALPHA_ABS_TOL:
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def compute_standard_alphas(ops: SbpOperatorSet) -> AlphaPair:
    """Largest alphas with N/2 - (d2 terms) >= 0 and N/2 - (d3 terms) >= 0."""
    pair = AlphaPair(
        alpha_II=_largest_alpha(ops, _second_terms(ops), "alpha_II"),
        alpha_III=_largest_alpha(ops, _third_terms(ops), "alpha_III"),
    )
    logger.info("order %d standard alphas: alpha_II=%.4f alpha_III=%.4f",
                ops.order, pair.alpha_II, pair.alpha_III)
    return pair


@functools.lru_cache(maxsize=None)
def standard_alphas(order: int, m: int = 41) -> AlphaPair:
    """Standard alphas of an order, computed once on [0, 1]."""
    return compute_standard_alphas(build_sbp_d4(order, build_grid(0.0, 1.0, m)))


def default_alphas(order: int) -> AlphaPair:
    if order not in REFERENCE_ALPHAS:
        raise UnsupportedOrderError(f"order {order} not in {SUPPORTED_ORDERS}")
    return AlphaPair(*REFERENCE_ALPHAS[order])


# ══════════════════════════════════════════════════════════════════════════════
#  VERIFICATION
# ══════════════════════════════════════════════════════════════════════════════

@dataclass
class OperatorReport:
    order: int
    m: int
    identity_residual: float
    symmetry_residual: float
    n_min_eigenvalue: float
    quadrature_error: float
    interior_error: float
    boundary_degree: int
    d1_order: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.identity_residual < 1e-12 and self.symmetry_residual == 0.0
                and self.n_min_eigenvalue >= -PSD_TOL and self.quadrature_error < 1e-13
                and self.interior_error < 1e-6)


def interior_rows(ops: SbpOperatorSet) -> slice:
    width = load_operator_table(ops.order).closure_width
    return slice(width, ops.m - width)


def verify_operator_set(ops: SbpOperatorSet) -> OperatorReport:
    """Check the structural invariants of one operator set."""
    lhs = ops.H @ ops.D4
    rhs = ops.N + ops.boundary_matrix()
    identity = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs)))
    symmetry = float(np.max(np.abs(ops.N - ops.N.T)))
    scale = max(1.0, float(np.linalg.norm(ops.N, 2)))
    n_min = min_eigenvalue(ops.N) / scale
    length = ops.grid.x_r - ops.grid.x_l
    quadrature = abs(float(np.sum(ops.norm_weights)) - length) / length

    # exact on quartics in the interior: D4 x^4 = 24, lower powers vanish
    x = ops.grid.points - ops.grid.x_l
    rows = interior_rows(ops)
    interior = 0.0
    for power, exact in ((4, 24.0), (3, 0.0), (2, 0.0), (1, 0.0), (0, 0.0)):
        err = np.max(np.abs((ops.D4 @ x ** power)[rows] - exact))
        interior = max(interior, float(err) / 24.0)

    return OperatorReport(
        order=ops.order,
        m=ops.m,
        identity_residual=identity,
        symmetry_residual=symmetry,
        n_min_eigenvalue=n_min,
        quadrature_error=quadrature,
        interior_error=interior,
        boundary_degree=ops.boundary_degree,
    )


def boundary_vector_orders(order: int, sizes: Tuple[int, ...] = (21, 41, 81)) -> Dict[str, float]:
    """Observed convergence orders of the right-boundary vectors on sin(x), [0, 1]."""
    exact = {"d1_r": np.cos(1.0), "d2_r": -np.sin(1.0), "d3_r": -np.cos(1.0)}
    errors: Dict[str, List[float]] = {k: [] for k in exact}
    hs = []
    for m in sizes:
        ops = build_sbp_d4(order, build_grid(0.0, 1.0, m))
        f = np.sin(ops.grid.points)
        hs.append(ops.h)
        for name, value in exact.items():
            errors[name].append(abs(float(getattr(ops, name) @ f) - value))
    observed = {}
    for name, errs in errors.items():
        observed[name] = float(np.log(errs[-2] / errs[-1]) / np.log(hs[-2] / hs[-1]))
    return observed
