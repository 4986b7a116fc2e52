"""
X-orthonormal basis extension by Gram-Schmidt with re-orthogonalization.
"""

import logging
from typing import Optional

import numpy as np

from affine.parameters import Parameter
from errors import LinearDependence
from reduced.model import ReducedBasis
from truth.linalg import x_norm

logger = logging.getLogger(__name__)

# Relative X-norm of the defect below which a vector counts as dependent.
DEPENDENCE_TOLERANCE = 1e-10


def orthonormalize_extend(
    basis: ReducedBasis, v: np.ndarray, x, parameter: Optional[Parameter] = None
) -> ReducedBasis:
    """
    Append the normalized X-orthogonal defect of v to the basis.

    Classical Gram-Schmidt followed by one re-orthogonalization pass.

    Args:
        basis: X-orthonormal basis
        v: Truth vector
        x: Inner product matrix
        parameter: Recorded as the snapshot parameter of the new column

    Returns:
        New basis with one more column

    Raises:
        LinearDependence: If ||defect||_X < 1e-10 ||v||_X
    """
    v = np.asarray(v, dtype=float)
    vector_norm = x_norm(x, v)
    defect = v.copy()
    for _ in range(2):
        if basis.size:
            defect = defect - basis.matrix @ basis.project(x, defect)
    defect_norm = x_norm(x, defect)
    if vector_norm == 0.0 or defect_norm < DEPENDENCE_TOLERANCE * vector_norm:
        raise LinearDependence(defect_norm, vector_norm)

    column = (defect / defect_norm)[:, None]
    parameters = basis.snapshot_parameters + ((parameter,) if parameter is not None else ())
    return ReducedBasis(np.hstack([basis.matrix, column]), parameters)


def orthonormalize_columns(
    vectors: np.ndarray,
    x,
    basis: Optional[ReducedBasis] = None,
    parameter: Optional[Parameter] = None,
) -> ReducedBasis:
    """
    Orthonormalize the columns of vectors against basis (and each other),
    skipping dependent columns. Every appended column records parameter.
    """
    result = basis if basis is not None else ReducedBasis.empty(vectors.shape[0])
    for j in range(vectors.shape[1]):
        try:
            result = orthonormalize_extend(result, vectors[:, j], x, parameter)
        except LinearDependence as e:
            logger.warning(f"[orthonormalize] column {j} skipped: {e}")
    return result
