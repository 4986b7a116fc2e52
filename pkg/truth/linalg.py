"""
Sparse linear algebra shared by truth solves and offline precomputation.
"""

import logging
from typing import Any

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from errors import CoercivityLoss

logger = logging.getLogger(__name__)

# Below this size generalized eigenproblems are solved densely.
DENSE_EIGEN_LIMIT = 600


class SPDFactor:
    """
    Sparse LDL^T-type factorization of a symmetric positive definite matrix.

    SuperLU is run in symmetric mode without diagonal pivoting, so the
    factorization succeeds with positive pivots exactly when the matrix is SPD.
    One factor serves any number of solves.
    """

    def __init__(self, matrix: sp.spmatrix, context: Any = None):
        """
        Factorize matrix.

        Args:
            matrix: Square sparse matrix expected to be SPD
            context: Reported in CoercivityLoss (usually the parameter)

        Raises:
            CoercivityLoss: If the matrix is not positive definite
        """
        self.size = matrix.shape[0]
        csc = sp.csc_matrix(matrix, dtype=float)
        if self.size == 0:
            self._lu = None
            return
        try:
            self._lu = spla.splu(
                csc,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True, "Equil": False},
            )
        except RuntimeError as e:
            raise CoercivityLoss(context, f"factorization failed: {e}") from e

        pivots = self._lu.U.diagonal()
        if not np.all(np.isfinite(pivots)) or np.any(pivots <= 0.0):
            raise CoercivityLoss(context, f"non-positive pivot {pivots.min()!r}")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve for one right-hand side vector or a block of columns."""
        rhs = np.asarray(rhs, dtype=float)
        if self._lu is None or rhs.size == 0:
            return np.zeros_like(rhs)
        return self._lu.solve(rhs)

    @property
    def is_symmetric(self) -> bool:
        """True if rows and columns were permuted alike, so U = D L^T."""
        return self._lu is not None and np.array_equal(self._lu.perm_r, self._lu.perm_c)

    def whiten(self, vectors: np.ndarray) -> np.ndarray:
        """
        Map columns v to D^{-1/2} U P^T v, so that Euclidean inner products
        of the results equal v^T A w.

        Raises:
            ValueError: If the factorization is not symmetric
        """
        if not self.is_symmetric:
            raise ValueError("factorization was not pivoted symmetrically")
        vectors = np.asarray(vectors, dtype=float)
        permuted = np.empty_like(vectors)
        permuted[self._lu.perm_c] = vectors
        scale = 1.0 / np.sqrt(self._lu.U.diagonal())
        if vectors.ndim == 1:
            return scale * (self._lu.U @ permuted)
        return scale[:, None] * (self._lu.U @ permuted)

    def as_operator(self) -> spla.LinearOperator:
        return spla.LinearOperator((self.size, self.size), matvec=self.solve, dtype=float)


def is_spd(matrix: sp.spmatrix) -> bool:
    """True if matrix factorizes with positive pivots."""
    try:
        SPDFactor(matrix)
    except CoercivityLoss:
        return False
    return True


def largest_generalized_eigenvalue(
    a: sp.spmatrix, x: sp.spmatrix, x_factor: SPDFactor | None = None
) -> float:
    """
    Largest lambda with a v = lambda x v for symmetric a and SPD x.

    Dense LAPACK for small systems, ARPACK (deterministic start vector) otherwise.
    """
    n = a.shape[0]
    if n == 0:
        return 0.0
    if n <= DENSE_EIGEN_LIMIT:
        values = sla.eigh(
            sp.csr_matrix(a).toarray(), sp.csr_matrix(x).toarray(),
            eigvals_only=True, subset_by_index=[n - 1, n - 1],
        )
        return float(values[-1])

    factor = x_factor or SPDFactor(x)
    values = spla.eigsh(
        sp.csr_matrix(a), k=1, M=sp.csr_matrix(x), Minv=factor.as_operator(),
        which="LA", v0=np.ones(n), tol=1e-10,
    )[0]
    return float(values[-1])


def smallest_generalized_eigenvalue(a: sp.spmatrix, x: sp.spmatrix) -> float:
    """Smallest lambda with a v = lambda x v (dense; intended for coarse meshes)."""
    values = sla.eigh(
        sp.csr_matrix(a).toarray(), sp.csr_matrix(x).toarray(),
        eigvals_only=True, subset_by_index=[0, 0],
    )
    return float(values[0])


def x_norm(x: sp.spmatrix, v: np.ndarray) -> float:
    """sqrt(v^T X v) for a vector, clamped at 0."""
    return float(np.sqrt(max(float(v @ (x @ v)), 0.0)))


def x_norms(x: sp.spmatrix, vectors: np.ndarray) -> np.ndarray:
    """Column-wise X-norms of an (n_h, k) array."""
    if vectors.size == 0:
        return np.zeros(vectors.shape[1] if vectors.ndim == 2 else 0)
    squares = np.einsum("ij,ij->j", vectors, x @ vectors)
    return np.sqrt(np.maximum(squares, 0.0))
