"""
Exact solutions of du/dt + mu du/dx = 0 on [0, 1] with u(x, 0) = 0 and
inflow value u(0, t) = 1, sampled as cell averages.
"""

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from errors import InputRejected


def cell_average_front(front: float, grid_n: int) -> np.ndarray:
    """
    Cell averages of the indicator of [0, front] on a uniform grid of [0, 1].

    The cut cell is averaged exactly.
    """
    cells = np.arange(grid_n)
    return np.clip(front * grid_n - cells, 0.0, 1.0)


def advection_snapshots(mu: float, grid_n: int, times: Sequence[float]) -> list[np.ndarray]:
    """
    Exact advection states u_mu(., t) for each t in times.

    The front sits at x = mu * t; left of it the state is 1, right of it 0.

    Args:
        mu: Transport speed in [0, 1]
        grid_n: Number of cells, >= 1
        times: Sample times in [0, 1]

    Returns:
        One vector of grid_n cell averages per time

    Raises:
        InputRejected: If grid_n < 1 or mu / times leave [0, 1]
    """
    if grid_n < 1:
        raise InputRejected(f"grid needs at least one cell, got {grid_n}", field="grid_n")
    if not 0.0 <= mu <= 1.0:
        raise InputRejected(f"speed must lie in [0, 1], got {mu}", field="mu")
    for t in times:
        if not 0.0 <= t <= 1.0:
            raise InputRejected(f"time must lie in [0, 1], got {t}", field="times")
    return [cell_average_front(mu * t, grid_n) for t in times]


def l2_cell_metric(grid_n: int) -> sp.csr_matrix:
    """L2 inner product of cell-average vectors: h * identity."""
    return sp.identity(grid_n, format="csr") / grid_n
