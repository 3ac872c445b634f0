"""
╔══════════════════════════════════════════════════════════════════════════════╗
║                          EXPERIMENT CONFIGURATION                             ║
║                                                                               ║
║  Settings for every experiment kind. Inherits common run settings from        ║
║  core.RunConfig; values can come from a key = value file and CLI flags.       ║
╚══════════════════════════════════════════════════════════════════════════════╝
"""

from pathlib import Path
from typing import Any, Dict, List, Literal

from pydantic import Field, field_validator, model_validator

from core import RunConfig

from .errors import ConfigError

ExperimentKind = Literal["verify-operators", "convergence", "spectral-table", "alphas",
                         "energy-trace", "alpha-scan"]

VALID_METHODS = ("sat", "projection", "hybrid")
VALID_CONDITIONS = ("clamped", "free", "clamped-free", "free-clamped", "ring")


class ExperimentConfig(RunConfig):
    """
    Experiment configuration.

    Inherited from RunConfig:
        - output_dir: Path           # Where CSVs and the summary go
        - random_seed: Optional[int] # Seed for the randomized energy checks
        - workers: int               # Concurrent cells
    """

    # ══════════════════════════════════════════════════════════════════════════
    #  SELECTION
    # ══════════════════════════════════════════════════════════════════════════

    kind: ExperimentKind = Field(default="spectral-table", description="Experiment to run")

    orders: List[int] = Field(default=[2, 4, 6], description="Interior orders of accuracy")

    methods: List[str] = Field(
        default=["sat", "projection"],
        description="Enforcement methods (hybrid applies to the ring only)",
    )

    conditions: List[str] = Field(
        default=["clamped", "free"],
        description="Boundary condition pairs, or 'ring' for the two-block periodic beam",
    )

    # ══════════════════════════════════════════════════════════════════════════
    #  DISCRETIZATION
    # ══════════════════════════════════════════════════════════════════════════

    m_list: List[int] = Field(
        default=[21, 41, 81, 161, 321],
        description="Grid points per block, strictly increasing",
    )

    spectral_m_list: List[int] = Field(
        default=[81, 161],
        description="Grid sizes for spectral radii; the two finest are extrapolated in m",
    )

    t_final: float = Field(default=1.0, description="Final time of integrations")

    cfl_fraction: float = Field(default=0.5, description="Time step as a fraction of the stability limit")

    energy_m: int = Field(default=101, description="Grid size of energy traces")

    # ══════════════════════════════════════════════════════════════════════════
    #  ALPHA SCAN
    # ══════════════════════════════════════════════════════════════════════════

    alpha_grid: List[float] = Field(
        default=[0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.625, 0.8, 1.0],
        description="Candidate values for both alpha_II and alpha_III",
    )

    scan_m: int = Field(default=21, description="Grid size of the alpha scan")

    # ══════════════════════════════════════════════════════════════════════════
    #  TOLERANCES
    # ══════════════════════════════════════════════════════════════════════════

    rho_tol: float = Field(default=1e-3, gt=0)
    rho_tol_order6: float = Field(default=1e-2, gt=0)
    rate_tol: float = Field(default=0.25, gt=0)
    drift_tol: float = Field(default=1e-4, gt=0)
    residual_tol: float = Field(default=1e-8, gt=0)
    alpha_tol: float = Field(default=1e-3, gt=0)

    dump_matrices: bool = Field(default=False, description="Write assembled matrices for debugging")

    @field_validator("orders")
    @classmethod
    def _known_orders(cls, v: List[int]) -> List[int]:
        bad = [o for o in v if o not in (2, 4, 6)]
        if bad or not v:
            raise ValueError(f"orders must be a non-empty subset of {{2, 4, 6}}, got {v}")
        return v

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, v: List[str]) -> List[str]:
        bad = [m for m in v if m not in VALID_METHODS]
        if bad or not v:
            raise ValueError(f"methods must be drawn from {VALID_METHODS}, got {v}")
        return v

    @field_validator("conditions")
    @classmethod
    def _known_conditions(cls, v: List[str]) -> List[str]:
        bad = [c for c in v if c not in VALID_CONDITIONS]
        if bad or not v:
            raise ValueError(f"conditions must be drawn from {VALID_CONDITIONS}, got {v}")
        return v

    @field_validator("m_list", "spectral_m_list")
    @classmethod
    def _increasing(cls, v: List[int]) -> List[int]:
        if not v or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"grid sizes must be strictly increasing, got {v}")
        if v[0] < 2:
            raise ValueError("grids need at least 2 points")
        return v

    @field_validator("t_final")
    @classmethod
    def _positive_time(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"t_final must be positive, got {v}")
        return v

    @field_validator("cfl_fraction")
    @classmethod
    def _cfl_range(cls, v: float) -> float:
        if not 0 < v <= 1:
            raise ValueError(f"cfl_fraction must lie in (0, 1], got {v}")
        return v

    @field_validator("alpha_grid")
    @classmethod
    def _positive_alphas(cls, v: List[float]) -> List[float]:
        if not v or any(a <= 0 for a in v):
            raise ValueError("alpha_grid needs positive values")
        return sorted(v)

    @model_validator(mode="after")
    def _hybrid_needs_ring(self) -> "ExperimentConfig":
        if "hybrid" in self.methods and "ring" not in self.conditions:
            raise ValueError("the hybrid method is only defined for interfaces; add 'ring' to conditions")
        return self


# ══════════════════════════════════════════════════════════════════════════════
#  CONFIG FILES
# ══════════════════════════════════════════════════════════════════════════════

LIST_KEYS = {"orders", "methods", "conditions", "m_list", "spectral_m_list", "alpha_grid"}


def load_config_file(path: Path) -> Dict[str, Any]:
    """Read ``key = value`` lines; ``#`` starts a comment, lists are comma-separated."""
    values: Dict[str, Any] = {}
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path.name}:{number}: expected 'key = value', got {raw!r}")
        key, value = key.strip().replace("-", "_"), value.strip()
        if key not in ExperimentConfig.model_fields:
            raise ConfigError(f"{path.name}:{number}: unknown key {key!r}")
        if key in LIST_KEYS:
            values[key] = [item.strip() for item in value.split(",") if item.strip()]
        else:
            values[key] = value
    return values


def build_config(file_values: Dict[str, Any], overrides: Dict[str, Any]) -> ExperimentConfig:
    """Merge file values with flag overrides (flags win) and validate."""
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**merged)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
