"""
╔══════════════════════════════════════════════════════════════════════════════╗
║                              SUMMARY TEMPLATES                                ║
║                                                                               ║
║  Human-readable summaries of experiment results.                              ║
╚══════════════════════════════════════════════════════════════════════════════╝
"""

from typing import List

from core import ExperimentResult


# ══════════════════════════════════════════════════════════════════════════════
#  TEMPLATES
# ══════════════════════════════════════════════════════════════════════════════

HEADERS = {
    "verify-operators": "SBP fourth-derivative operators: identity, symmetry, semi-definiteness, accuracy",
    "alphas": "Standard alphas: largest (alpha_II, alpha_III) keeping the reduced boundary form semi-definite",
    "spectral-table": "Undivided spectral radii rho(h^4 D), extrapolated in m",
    "convergence": "Convergence to standing waves in the h-weighted l2 norm",
    "energy-trace": "Discrete energy over the integration interval",
    "alpha-scan": "Error and spectral radius across (alpha_II, alpha_III)",
}

ROW_TEMPLATE = "  {order:>2} {method:<11} {conditions:<13} m={m:<5} {values}  [{status}]"
CHECK_TEMPLATE = "  {mark} {name}{detail}"


def _format_value(name: str, value) -> str:
    return f"{name}={value:.6g}" if value is not None else ""


def format_result(result: ExperimentResult) -> str:
    """Rows, then checks, then an overall verdict."""
    lines: List[str] = [HEADERS.get(result.kind, result.kind), ""]
    for row in result.rows:
        values = " ".join(filter(None, (
            _format_value("eps", row.eps),
            _format_value("rate", row.rate),
            _format_value("rho", row.rho_undivided),
            _format_value("drift", row.energy_drift),
        )))
        if row.message:
            values = f"{values} {row.message}".strip()
        lines.append(ROW_TEMPLATE.format(order=row.order, method=row.method,
                                         conditions=row.bc_or_interface, m=row.m or "-",
                                         values=values, status=row.status))
    if result.checks:
        lines += ["", "Checks:"]
    for check in result.checks:
        mark = "PASS" if check.passed else ("NOTE" if check.advisory else "FAIL")
        detail = ""
        if check.measured is not None:
            detail = f": {check.measured:.6g}"
            if check.expected is not None:
                detail += f" vs {check.expected:.6g}"
            if check.tol is not None:
                detail += f" (tol {check.tol:.1g})"
        lines.append(CHECK_TEMPLATE.format(mark=mark, name=check.name, detail=detail))
    lines += ["", "PASSED" if result.passed else "FAILED", ""]
    return "\n".join(lines)
