"""
Energy-stable SBP discretizations of the Euler-Bernoulli beam.

Modules:
    - sbp_core.py          : fourth-derivative SBP operators and standard alphas
    - boundary_closure.py  : SAT and projection boundary closures on one block
    - interface_coupling.py: SAT, projection and hybrid interfaces, the two-block ring
    - time_integration.py  : fourth-order two-step integrator and stability limits
    - analytic_solutions.py: standing-wave reference solutions
    - experiments.py       : experiment runner
    - config.py            : ExperimentConfig
"""

from .config import ExperimentConfig
from .experiments import (ExperimentRunner, build_system, run_alpha_scan, run_convergence,
                          run_energy_trace, run_spectral_table)

__all__ = [
    "ExperimentConfig",
    "ExperimentRunner",
    "build_system",
    "run_alpha_scan",
    "run_convergence",
    "run_energy_trace",
    "run_spectral_table",
]
