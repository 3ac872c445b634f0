"""
╔══════════════════════════════════════════════════════════════════════════════╗
║                        STANDING-WAVE REFERENCE SOLUTIONS                      ║
║                                                                               ║
║  u(x, t) = cos(omega t) X(x),  omega = beta^2 sqrt(a / b),                    ║
║  X = A1 cosh(beta x) + A2 cos(beta x) + A3 sin(beta x) + A4 sinh(beta x).     ║
╚══════════════════════════════════════════════════════════════════════════════╝
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.optimize import brentq

from .errors import LengthMismatchError, NonConvergenceError, OperatorDataError

logger = logging.getLogger(__name__)

PARAMETER_FILE = Path(__file__).parent / "data" / "standing_waves.txt"


@dataclass(frozen=True)
class StandingWaveParams:
    beta: float
    A1: float
    A2: float
    A3: float
    A4: float
    a: float = 1.0
    b: float = 1.0
    domain: Tuple[float, float] = (0.0, 1.0)

    @property
    def omega(self) -> float:
        return self.beta ** 2 * np.sqrt(self.a / self.b)

    def mode(self, x, derivative: int = 0):
        """k-th x-derivative of X in closed form."""
        bx = self.beta * np.asarray(x, dtype=float)
        ch, c, s, sh = np.cosh(bx), np.cos(bx), np.sin(bx), np.sinh(bx)
        # derivative cycles: cosh->sinh->cosh, cos->-sin->-cos->sin, sin->cos->-sin->-cos
        k = derivative % 4
        hyper_even = k % 2 == 0
        trig = [(c, s), (-s, c), (-c, -s), (s, -c)][k]
        value = (self.A1 * (ch if hyper_even else sh) + self.A2 * trig[0] + self.A3 * trig[1]
                 + self.A4 * (sh if hyper_even else ch))
        return self.beta ** derivative * value

    def eval(self, x, t: float):
        return np.cos(self.omega * t) * self.mode(x)

    def eval_dt(self, x, t: float):
        return -self.omega * np.sin(self.omega * t) * self.mode(x)


@dataclass(frozen=True)
class PiecewiseStandingWave:
    """Block 1 on [-1, 0], block 2 on [0, 1], one shared temporal frequency."""
    block1: StandingWaveParams
    block2: StandingWaveParams

    @property
    def blocks(self) -> Tuple[StandingWaveParams, StandingWaveParams]:
        return (self.block1, self.block2)

    def frequency_mismatch(self) -> float:
        w1, w2 = self.block1.omega, self.block2.omega
        return abs(w1 - w2) / max(abs(w1), abs(w2))


# ══════════════════════════════════════════════════════════════════════════════
#  PARAMETER DATA
# ══════════════════════════════════════════════════════════════════════════════

@functools.lru_cache(maxsize=None)
def load_parameter_sets(path: Path = PARAMETER_FILE) -> Dict[str, StandingWaveParams]:
    """Parse the ``[section]`` / ``key = value`` parameter file."""
    sections: Dict[str, Dict[str, str]] = {}
    current = None
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = sections.setdefault(line[1:-1].strip(), {})
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise OperatorDataError(f"{Path(path).name}: cannot parse '{raw}'")
        if current is not None:
            current[key.strip()] = value.strip()

    sets = {}
    for name, entries in sections.items():
        try:
            x_l, x_r = (float(v) for v in entries["domain"].split())
            sets[name] = StandingWaveParams(
                beta=float(entries["beta"]),
                A1=float(entries["A1"]), A2=float(entries["A2"]),
                A3=float(entries["A3"]), A4=float(entries["A4"]),
                a=float(entries["a"]), b=float(entries["b"]),
                domain=(x_l, x_r),
            )
        except (KeyError, ValueError) as exc:
            raise OperatorDataError(f"parameter set [{name}] is incomplete: {exc}") from exc
    logger.debug("loaded %d standing-wave parameter sets", len(sets))
    return sets


def standing_wave(name: str) -> StandingWaveParams:
    return load_parameter_sets()[name]


def ring_wave() -> PiecewiseStandingWave:
    sets = load_parameter_sets()
    return PiecewiseStandingWave(sets["ring_block1"], sets["ring_block2"])


# ══════════════════════════════════════════════════════════════════════════════
#  VERIFICATION
# ══════════════════════════════════════════════════════════════════════════════

@dataclass
class ResidualReport:
    residuals: Dict[str, float] = field(default_factory=dict)
    tol: float = 1e-8

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol


def _relative(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def verify_params(params: Union[StandingWaveParams, PiecewiseStandingWave], conditions: str,
                  tol: float = 1e-8) -> ResidualReport:
    """Evaluate every imposed condition of a parameter set in closed form."""
    report = ResidualReport(tol=tol)
    if isinstance(params, PiecewiseStandingWave):
        if conditions != "ring":
            raise ValueError(f"piecewise solutions are checked against 'ring', not {conditions!r}")
        p1, p2 = params.blocks
        joints = {"x=0": (p1.domain[1], p2.domain[0]), "x=+-1": (p1.domain[0], p2.domain[1])}
        for label, (x1, x2) in joints.items():
            for k, name in enumerate(("u", "u_x", "a u_xx", "a u_xxx")):
                w1 = p1.a if k >= 2 else 1.0
                w2 = p2.a if k >= 2 else 1.0
                report.residuals[f"{name} at {label}"] = _relative(
                    w1 * float(p1.mode(x1, k)), w2 * float(p2.mode(x2, k)))
        report.residuals["frequency"] = params.frequency_mismatch()
        return report

    derivatives = {"clamped": (0, 1), "free": (2, 3)}.get(conditions)
    if derivatives is None:
        raise ValueError(f"unknown boundary conditions {conditions!r}")
    for side, x in zip(("left", "right"), params.domain):
        for k in derivatives:
            report.residuals[f"X^({k}) {side}"] = _relative(float(params.mode(x, k)), 0.0)
    return report


def pde_residual(params: StandingWaveParams, x, t: float) -> np.ndarray:
    """Relative residual of b u_tt + a u_xxxx at the given points."""
    T = np.cos(params.omega * t)
    u_tt = -params.omega ** 2 * T * params.mode(x)
    u_xxxx = T * params.mode(x, 4)
    lhs, rhs = params.b * u_tt, -params.a * u_xxxx
    return np.abs(lhs - rhs) / np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))


# ══════════════════════════════════════════════════════════════════════════════
#  ROOT FINDING
# ══════════════════════════════════════════════════════════════════════════════

def _basis(params: StandingWaveParams, beta: float):
    """The four unit-coefficient modes of params at wavenumber beta."""
    return [replace(params, beta=beta, A1=e[0], A2=e[1], A3=e[2], A4=e[3]) for e in np.eye(4)]


def boundary_matrix(beta: float, conditions: str, domain: Tuple[float, float] = (0.0, 1.0)) -> np.ndarray:
    """Rows of the homogeneous conditions applied to the four modes; singular at eigen-wavenumbers."""
    derivatives = {"clamped": (0, 1), "free": (2, 3)}.get(conditions)
    if derivatives is None:
        raise ValueError(f"unknown boundary conditions {conditions!r}")
    modes = _basis(StandingWaveParams(beta, 1.0, 0.0, 0.0, 0.0, domain=domain), beta)
    return np.array([[float(mode.mode(x, k)) / beta ** k for mode in modes]
                     for x in domain for k in derivatives])


def ring_matrix(beta1: float, block1: StandingWaveParams, block2: StandingWaveParams) -> np.ndarray:
    """Continuity of u, u_x, a u_xx, a u_xxx at x = 0 and across the wrap x = -1 ~ 1."""
    beta2 = ring_partner_beta(beta1, block1, block2)
    modes1, modes2 = _basis(block1, beta1), _basis(block2, beta2)
    joints = ((block1.domain[1], block2.domain[0]), (block1.domain[0], block2.domain[1]))
    rows = []
    for x1, x2 in joints:
        for k in range(4):
            w1 = block1.a if k >= 2 else 1.0
            w2 = block2.a if k >= 2 else 1.0
            scale = abs(beta1) ** k
            rows.append([w1 * float(m.mode(x1, k)) / scale for m in modes1]
                        + [-w2 * float(m.mode(x2, k)) / scale for m in modes2])
    return np.array(rows)


def ring_partner_beta(beta1: float, block1: StandingWaveParams, block2: StandingWaveParams) -> float:
    """beta of block 2 that shares the temporal frequency of block 1."""
    ratio = (block1.a * block2.b) / (block2.a * block1.b)
    return beta1 * ratio ** 0.25


def _root_near(det: Callable[[float], float], guess: float, width: float) -> float:
    lo, hi = guess - width, guess + width
    if np.sign(det(lo)) == np.sign(det(hi)):
        raise NonConvergenceError(f"no sign change of the boundary determinant in [{lo}, {hi}]")
    return brentq(det, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _null_vector(B: np.ndarray) -> np.ndarray:
    _, s, Vt = linalg.svd(B)
    logger.debug("boundary matrix singular values: min %.3e, max %.3e", s[-1], s[0])
    return Vt[-1]


def solve_standing_wave(conditions: str, beta_guess: float, width: float = 0.1,
                        domain: Tuple[float, float] = (0.0, 1.0)) -> StandingWaveParams:
    """Homogeneous clamped or free beam mode nearest beta_guess, normalized to A1 = 1."""
    beta = _root_near(lambda z: float(np.linalg.det(boundary_matrix(z, conditions, domain))), beta_guess, width)
    coeffs = _null_vector(boundary_matrix(beta, conditions, domain))
    coeffs = coeffs / coeffs[0]
    logger.info("%s standing wave: beta = %.15f", conditions, beta)
    return StandingWaveParams(beta, *coeffs, domain=domain)


def solve_ring_wave(template: PiecewiseStandingWave, beta_guess: float,
                    width: float = 0.1) -> PiecewiseStandingWave:
    """Piecewise mode of the two-block ring with the template's coefficients and domains.

    The root is sought in the block-1 wavenumber; block 2 follows from the
    shared frequency. The eight coefficients are scaled to unit Euclidean norm
    with A1 of block 1 positive.
    """
    block1, block2 = template.blocks
    beta1 = _root_near(lambda z: float(np.linalg.det(ring_matrix(z, block1, block2))), beta_guess, width)
    coeffs = _null_vector(ring_matrix(beta1, block1, block2))
    coeffs = coeffs * np.sign(coeffs[0]) / np.linalg.norm(coeffs)
    beta2 = ring_partner_beta(beta1, block1, block2)
    logger.info("ring standing wave: beta1 = %.15f, beta2 = %.15f", beta1, beta2)
    return PiecewiseStandingWave(replace(block1, beta=beta1, A1=coeffs[0], A2=coeffs[1], A3=coeffs[2], A4=coeffs[3]),
                                 replace(block2, beta=beta2, A1=coeffs[4], A2=coeffs[5], A3=coeffs[6], A4=coeffs[7]))


# ══════════════════════════════════════════════════════════════════════════════
#  ERRORS
# ══════════════════════════════════════════════════════════════════════════════

def error_norm(u_exact, v, h: float) -> float:
    """sqrt(h sum (u - v)^2); pass sequences of per-block arrays to sum over blocks."""
    if isinstance(u_exact, (list, tuple)):
        if not isinstance(v, (list, tuple)) or len(u_exact) != len(v):
            raise LengthMismatchError("exact and numerical solutions have different block counts")
        pairs = list(zip(u_exact, v))
    else:
        pairs = [(u_exact, v)]
    total = 0.0
    for u_block, v_block in pairs:
        u_block = np.asarray(u_block, dtype=float)
        v_block = np.asarray(v_block, dtype=float)
        if u_block.shape != v_block.shape:
            raise LengthMismatchError(f"length mismatch: {u_block.shape} vs {v_block.shape}")
        total += float(np.sum((u_block - v_block) ** 2))
    return float(np.sqrt(h * total))
