"""
Proper orthogonal decomposition by the method of snapshots.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.linalg as sla

from errors import InputRejected
from offline.orthonormalize import orthonormalize_columns

logger = logging.getLogger(__name__)

# Singular values below this fraction of sigma_1 are dropped; the Gram
# eigenvalues only resolve down to about M * eps * lambda_1.
RANK_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PODResult:
    """
    Attributes:
        modes: (n_h, r) X-orthonormal modes, r = min(m, numerical rank)
        singular_values: Leading min(m, M) singular values, non-increasing
        spectrum: All M singular values of the snapshot set
    """
    modes: np.ndarray
    singular_values: np.ndarray
    spectrum: np.ndarray

    @property
    def num_modes(self) -> int:
        return self.modes.shape[1]

    def tail_energy(self, count: int) -> float:
        """sqrt(sum_{k > count} sigma_k^2)."""
        return float(np.sqrt(np.sum(self.spectrum[count:] ** 2)))


def snapshot_matrix(snapshots: Union[np.ndarray, Sequence[np.ndarray]]) -> np.ndarray:
    """Stack snapshots as columns of an (n_h, M) array."""
    if isinstance(snapshots, np.ndarray) and snapshots.ndim == 2:
        matrix = snapshots
    else:
        if len(snapshots) == 0:
            raise InputRejected("snapshot set is empty", field="snapshots")
        sizes = {np.shape(s) for s in snapshots}
        if len(sizes) != 1:
            raise InputRejected(f"snapshots have differing shapes {sorted(sizes)}", field="snapshots")
        matrix = np.column_stack([np.asarray(s, dtype=float) for s in snapshots])
    if matrix.shape[1] == 0:
        raise InputRejected("snapshot set is empty", field="snapshots")
    return np.asarray(matrix, dtype=float)


def pod(snapshots: Union[np.ndarray, Sequence[np.ndarray]], x, m: int) -> PODResult:
    """
    Leading X-orthonormal POD modes of a snapshot set.

    Eigendecomposition of the snapshot Gram matrix G_ij = <s_i, s_j>_X;
    modes are snapshot combinations scaled by the inverse singular values
    and then re-orthonormalized in X.

    Args:
        snapshots: (n_h, M) array or list of M truth vectors
        x: Inner product matrix
        m: Maximum number of modes

    Returns:
        PODResult; empty modes for an all-zero snapshot set

    Raises:
        InputRejected: If m < 1 or the set is empty
    """
    if m < 1:
        raise InputRejected(f"number of modes must be >= 1, got {m}", field="m")
    s = snapshot_matrix(snapshots)
    count = s.shape[1]

    gram = s.T @ (x @ s)
    gram = 0.5 * (gram + gram.T)
    eigenvalues, eigenvectors = sla.eigh(gram)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.maximum(eigenvalues[order], 0.0)
    eigenvectors = eigenvectors[:, order]
    spectrum = np.sqrt(eigenvalues)

    leading = spectrum[:min(m, count)].copy()
    if spectrum[0] == 0.0:
        logger.warning("[pod] snapshot set is identically zero")
        return PODResult(np.zeros((s.shape[0], 0)), leading, spectrum)

    # Gram eigenvalues carry M * eps * lambda_1 error, so singular values below
    # sqrt(M * eps) * sigma_1 are noise; the cut never drops under RANK_TOLERANCE.
    cut = max(RANK_TOLERANCE, np.sqrt(count * np.finfo(float).eps)) * spectrum[0]
    rank = int(np.sum(spectrum > cut))
    keep = min(m, rank)
    if keep < m and m <= count:
        logger.debug(f"[pod] numerical rank {rank} below requested {m} modes")

    raw_modes = s @ (eigenvectors[:, :keep] / spectrum[:keep])
    modes = orthonormalize_columns(raw_modes, x).matrix
    return PODResult(modes, leading, spectrum)
