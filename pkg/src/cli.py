"""
╔══════════════════════════════════════════════════════════════════════════════╗
║                              COMMAND LINE                                     ║
║                                                                               ║
║  beam-sbp <experiment> [options]: runs one experiment kind, writes the CSV,   ║
║  provenance sidecar and summary, exits 0 when every check passes.             ║
╚══════════════════════════════════════════════════════════════════════════════╝
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from core import ExperimentResult, OutputWriter, ResultRow

from .config import build_config, load_config_file
from .errors import BeamSbpError, ConfigError
from .experiments import ExperimentRunner
from .report import format_result

logger = logging.getLogger("src")

EXPERIMENTS = {
    "verify-operators": "Check the SBP identities and accuracy of every operator",
    "alphas": "Compute the standard alpha pairs",
    "spectral-table": "Undivided spectral radii for each closure",
    "convergence": "Errors and observed rates against standing waves",
    "energy-trace": "Energy over time for each closure",
    "alpha-scan": "Error and spectral radius over an alpha grid",
}

EPILOG = """
Examples:
    beam-sbp verify-operators
    beam-sbp spectral-table --order 2 --order 4 --bc clamped --bc ring --method sat --method hybrid
    beam-sbp convergence --order 2 --method projection --bc clamped --m-list 21,41,81
    beam-sbp energy-trace --config runs/energy.cfg --out results/energy
"""


def _int_list(text: str) -> List[int]:
    return [int(item) for item in text.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beam-sbp",
        description="Energy-stable SBP experiments for the Euler-Bernoulli beam",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind, help_text in EXPERIMENTS.items():
        cmd = sub.add_parser(kind, help=help_text)
        cmd.add_argument("--order", type=int, action="append", dest="orders", choices=(2, 4, 6),
                         help="Operator order (repeatable)")
        cmd.add_argument("--method", action="append", dest="methods",
                         choices=("sat", "projection", "hybrid"), help="Enforcement method (repeatable)")
        cmd.add_argument("--bc", action="append", dest="conditions",
                         choices=("clamped", "free", "clamped-free", "free-clamped", "ring"),
                         help="Boundary conditions or 'ring' (repeatable)")
        cmd.add_argument("--m-list", type=_int_list, help="Comma-separated grid sizes")
        cmd.add_argument("--t-final", type=float, help="Final time")
        cmd.add_argument("--cfl-frac", type=float, dest="cfl_fraction",
                         help="Time step as a fraction of the stability limit")
        cmd.add_argument("--out", type=Path, dest="output_dir", help="Output directory")
        cmd.add_argument("--config", type=Path, help="key = value configuration file")
        cmd.add_argument("--workers", type=int, help="Cells run concurrently")
        cmd.add_argument("--seed", type=int, dest="random_seed", help="Seed for randomized checks")
        cmd.add_argument("--dump-matrices", action="store_true", default=None,
                         help="Write assembled matrices under matrices/")
        cmd.add_argument("--verbose", "-v", action="count", default=0)
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else (logging.INFO if verbosity == 1 else logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)-7s %(name)s: %(message)s",
                        datefmt="%H:%M:%S")


def overrides_from(args: argparse.Namespace) -> Dict[str, object]:
    values = {
        "kind": args.kind,
        "orders": args.orders,
        "methods": args.methods,
        "conditions": args.conditions,
        "t_final": args.t_final,
        "cfl_fraction": args.cfl_fraction,
        "output_dir": args.output_dir,
        "workers": args.workers,
        "random_seed": args.random_seed,
        "dump_matrices": args.dump_matrices,
    }
    if args.m_list is not None:
        key = "spectral_m_list" if args.kind == "spectral-table" else "m_list"
        values[key] = args.m_list
    return values


def error_result(kind: str, exc: Exception) -> ExperimentResult:
    row = ResultRow(experiment=kind, order=0, method="-", bc_or_interface="-", status="error",
                    message=f"{type(exc).__name__}: {exc}")
    return ExperimentResult(kind=kind, rows=[row])


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    try:
        file_values = load_config_file(args.config) if args.config else {}
        config = build_config(file_values, overrides_from(args))
    except ConfigError as exc:
        logger.error("%s", exc)
        return 2

    writer = OutputWriter(config.output_dir)
    try:
        result = ExperimentRunner(config).run_kind()
    except BeamSbpError as exc:
        logger.error("%s aborted: %s", config.kind, exc)
        result = error_result(config.kind, exc)

    path = writer.write_result(result)
    summary = format_result(result)
    writer.write_summary(summary)
    print(summary)
    logger.info("wrote %s", path)
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
