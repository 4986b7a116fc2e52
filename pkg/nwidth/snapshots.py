"""
Snapshot sets and the orthogonal indicator functions contained in the
advection manifold.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from errors import InputRejected
from truth.advection import advection_snapshots

logger = logging.getLogger(__name__)

MEMBERSHIP_TOLERANCE = 1e-14


@dataclass(frozen=True)
class SnapshotSet:
    """
    Finite sample of a solution manifold.

    Attributes:
        vectors: (n_h, M) snapshots as columns
        metric: Inner product matrix X
        label: Name used in reports
    """
    vectors: np.ndarray
    metric: object
    label: str = "snapshots"

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=float)
        if vectors.ndim != 2 or vectors.shape[1] < 1:
            raise InputRejected("snapshot set needs at least one vector", field="vectors")
        if self.metric.shape != (vectors.shape[0], vectors.shape[0]):
            raise InputRejected(
                f"metric shape {self.metric.shape} does not match vector length {vectors.shape[0]}",
                field="metric",
            )
        object.__setattr__(self, "vectors", vectors)

    @classmethod
    def from_vectors(cls, vectors: Sequence[np.ndarray], metric, label: str = "snapshots") -> "SnapshotSet":
        if len(vectors) == 0:
            raise InputRejected("snapshot set needs at least one vector", field="vectors")
        if len({np.shape(v) for v in vectors}) != 1:
            raise InputRejected("snapshots differ in length", field="vectors")
        return cls(np.column_stack(vectors), metric, label)

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    @property
    def dimension(self) -> int:
        return self.vectors.shape[0]


def _check_alignment(big_n: int, n: int, grid_n: int) -> None:
    if big_n < 1 or not 1 <= n <= big_n:
        raise InputRejected(f"need 1 <= n <= N, got n={n}, N={big_n}", field="n")
    if grid_n < 1 or grid_n % big_n != 0:
        raise InputRejected(f"grid of {grid_n} cells is not aligned with N={big_n}", field="grid_n")


def psi_function(big_n: int, n: int, grid_n: int) -> np.ndarray:
    """
    Cell averages of the indicator of [(n-1)/N, n/N].

    The L2 norm is N^{-1/2}; distinct n give orthogonal functions.

    Raises:
        InputRejected: If n is out of range or grid_n is not a multiple of N
    """
    _check_alignment(big_n, n, grid_n)
    width = grid_n // big_n
    psi = np.zeros(grid_n)
    psi[(n - 1) * width:n * width] = 1.0
    return psi


def psi_in_manifold_check(big_n: int, n: int, grid_n: int) -> bool:
    """
    True if psi_{N,n} = u_1(., n/N) - u_1(., (n-1)/N) on the grid.

    Raises:
        InputRejected: On a misaligned grid
    """
    _check_alignment(big_n, n, grid_n)
    earlier, later = advection_snapshots(1.0, grid_n, [(n - 1) / big_n, n / big_n])
    difference = later - earlier
    return bool(np.max(np.abs(difference - psi_function(big_n, n, grid_n))) <= MEMBERSHIP_TOLERANCE)
