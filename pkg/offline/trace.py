"""
Greedy iteration records and their CSV exports.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from affine.parameters import Parameter
from artifacts.store import format_float, open_csv

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GreedyIteration:
    """
    One greedy iteration.

    selected_mu is None on the final record, which only reports the error
    of the finished basis. A seeded iteration selects the configured seed
    parameter instead of the argmax.
    """
    index: int
    selected_mu: Optional[Parameter]
    max_estimated_error: float
    basis_size_after: int
    max_true_error: Optional[float] = None
    modes_added: int = 0
    seeded: bool = False


@dataclass
class GreedyTrace:
    """
    Convergence record of a greedy run.

    Attributes:
        training_set: Parameters indexing the error tables
        iterations: Records in order
        error_tables: Per-iteration estimated errors over the training set
        stop_reason: 'target', 'max_size', 'dependence', 'aborted' or '' while running
    """
    training_set: list[Parameter]
    iterations: list[GreedyIteration] = field(default_factory=list)
    error_tables: list[np.ndarray] = field(default_factory=list)
    stop_reason: str = ""

    def record(self, iteration: GreedyIteration, errors: np.ndarray) -> None:
        self.iterations.append(iteration)
        self.error_tables.append(np.asarray(errors, dtype=float))

    @property
    def max_errors(self) -> list[float]:
        return [it.max_estimated_error for it in self.iterations]

    def envelope(self) -> np.ndarray:
        """
        Running minimum of max_errors.

        The basis is nested, so entry k is the best certified training error
        reachable by truncating the final basis to at most k columns. The raw
        max_errors need not decrease: the min-theta estimator at parameters
        other than the last selection can grow when a column is added.
        """
        return np.minimum.accumulate(np.asarray(self.max_errors, dtype=float))

    @property
    def final_error(self) -> float:
        return self.iterations[-1].max_estimated_error if self.iterations else float("inf")

    @property
    def basis_sizes(self) -> list[int]:
        return [it.basis_size_after for it in self.iterations]

    def argmax_consistent(self) -> bool:
        """Re-check that every selection is an argmax of its error table."""
        for iteration, table in zip(self.iterations, self.error_tables):
            if iteration.selected_mu is None or iteration.seeded:
                continue
            index = self.training_set.index(iteration.selected_mu)
            if table[index] < table.max():
                return False
        return True

    def _dimension(self) -> int:
        return self.training_set[0].dimension if self.training_set else 0

    def to_csv(self, path: str | Path) -> Path:
        """iteration, mu_i..., max_estimated_error, basis_size, modes_added, max_true_error, seeded."""
        dim = self._dimension()
        header = [
            "iteration", *[f"mu_{i}" for i in range(dim)],
            "max_estimated_error", "basis_size", "modes_added", "max_true_error", "seeded",
        ]
        with open_csv(path, header) as writer:
            for it in self.iterations:
                mu = [format_float(v) for v in it.selected_mu.values] if it.selected_mu else [""] * dim
                writer.writerow([
                    it.index, *mu, format_float(it.max_estimated_error), it.basis_size_after,
                    it.modes_added, format_float(it.max_true_error), int(it.seeded),
                ])
        return Path(path)

    def error_table_to_csv(self, path: str | Path) -> Path:
        """Long format: iteration, training_index, mu_i..., estimated_error."""
        dim = self._dimension()
        header = ["iteration", "training_index", *[f"mu_{i}" for i in range(dim)], "estimated_error"]
        with open_csv(path, header) as writer:
            for iteration, table in enumerate(self.error_tables):
                for index, (mu, value) in enumerate(zip(self.training_set, table)):
                    writer.writerow([
                        iteration, index, *[format_float(v) for v in mu.values], format_float(value),
                    ])
        return Path(path)
