#!/usr/bin/env python3
"""
Run one experiment kind from a checkout without installing.

Usage:
    python scripts/beam_experiments.py spectral-table --order 2 --bc clamped --bc free
    python scripts/beam_experiments.py convergence --order 4 --method sat --bc ring -v
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
