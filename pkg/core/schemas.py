"""Pydantic schemas for experiment data."""

import hashlib
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

CSV_COLUMNS = (
    "experiment", "order", "method", "bc_or_interface", "m", "h", "k",
    "eps", "rate", "rho_undivided", "energy_drift", "status",
)

# statuses that do not fail a run
PASSING_STATUSES = ("ok", "roundoff", "infeasible")


class ExperimentCell(BaseModel):
    """One independent unit of work: an (order, method, conditions, m) combination."""
    experiment: str
    order: int
    method: str
    conditions: str
    m: int = 0
    alpha_II: Optional[float] = None
    alpha_III: Optional[float] = None

    @property
    def sort_key(self) -> Tuple:
        return (self.experiment, self.order, self.method, self.conditions, self.m,
                self.alpha_II or 0.0, self.alpha_III or 0.0)

    @property
    def label(self) -> str:
        text = f"{self.experiment} order={self.order} {self.method}/{self.conditions} m={self.m}"
        if self.alpha_II is not None:
            text += f" alphas=({self.alpha_II:.4g}, {self.alpha_III:.4g})"
        return text


class ResultRow(BaseModel):
    """One CSV row."""
    experiment: str
    order: int
    method: str
    bc_or_interface: str
    m: Optional[int] = None
    h: Optional[float] = None
    k: Optional[float] = None
    eps: Optional[float] = None
    rate: Optional[float] = None
    rho_undivided: Optional[float] = None
    energy_drift: Optional[float] = None
    status: str = "ok"
    message: str = ""
    provenance: Dict[str, Any] = Field(default_factory=dict)

    def csv_values(self) -> List[str]:
        values = []
        for column in CSV_COLUMNS:
            value = getattr(self, column)
            if value is None:
                values.append("")
            elif isinstance(value, float):
                values.append(repr(value))
            else:
                values.append(str(value))
        return values


class Check(BaseModel):
    """A named pass/fail assertion. Advisory checks are reported but never fail a run."""
    name: str
    passed: bool
    measured: Optional[float] = None
    expected: Optional[float] = None
    tol: Optional[float] = None
    advisory: bool = False


class ExperimentResult(BaseModel):
    kind: str
    rows: List[ResultRow] = Field(default_factory=list)
    checks: List[Check] = Field(default_factory=list)
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        rows_ok = all(row.status in PASSING_STATUSES for row in self.rows)
        return rows_ok and all(c.passed or c.advisory for c in self.checks)


def config_hash(payload: str) -> str:
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
