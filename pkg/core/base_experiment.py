"""Base experiment class."""

import logging
import zlib
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .schemas import ExperimentCell, ResultRow

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    """Run configuration shared by every experiment kind."""
    output_dir: Path = Path("results")
    random_seed: Optional[int] = None
    workers: int = Field(default=1, ge=1)


class BaseExperiment(ABC):
    """Base class for experiment runners. Implement run_cell()."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.seed = config.random_seed if config.random_seed is not None else 0

    def cell_rng(self, cell: ExperimentCell) -> np.random.Generator:
        """Random stream of one cell, fixed by the seed and the cell label."""
        return np.random.default_rng([self.seed, zlib.crc32(cell.label.encode())])

    @abstractmethod
    def run_cell(self, cell: ExperimentCell) -> ResultRow:
        """Run one independent cell. Implement this in your experiment."""

    def run(self, cells: Sequence[ExperimentCell]) -> List[ResultRow]:
        """Run all cells and return rows in sorted-key order."""
        ordered = sorted(cells, key=lambda c: c.sort_key)
        if self.config.workers > 1 and len(ordered) > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                rows = list(pool.map(self._run_logged, ordered))
        else:
            rows = [self._run_logged(cell) for cell in ordered]
        return rows

    def _run_logged(self, cell: ExperimentCell) -> ResultRow:
        row = self.run_cell(cell)
        logger.info("  %s: %s", cell.label, row.status)
        return row
