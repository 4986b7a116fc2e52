"""
Affinely decomposed operators A(mu) = sum_q theta_q(mu) A_q.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from affine.coefficients import CoefficientFunction
from affine.parameters import Parameter, ParameterDomain
from errors import InputRejected

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class AffineOperator:
    """
    Ordered list of Q terms (theta_q, A_q).

    Term order is significant: every reduced quantity downstream is indexed by it.

    Attributes:
        coefficients: theta_1 ... theta_Q
        matrices: A_1 ... A_Q, sparse symmetric, identical shapes
        domain: Parameter domain the coefficients are defined on
    """
    coefficients: tuple[CoefficientFunction, ...]
    matrices: tuple[sp.csr_matrix, ...]
    domain: ParameterDomain

    def __post_init__(self):
        coefficients = tuple(self.coefficients)
        matrices = tuple(sp.csr_matrix(a, dtype=float) for a in self.matrices)
        if not coefficients:
            raise InputRejected("affine operator needs at least one term", field="terms")
        if len(coefficients) != len(matrices):
            raise InputRejected(
                f"{len(coefficients)} coefficients but {len(matrices)} matrices", field="terms"
            )
        shape = matrices[0].shape
        if shape[0] != shape[1]:
            raise InputRejected(f"operator terms must be square, got {shape}", field="matrices")
        for q, a in enumerate(matrices):
            if a.shape != shape:
                raise InputRejected(f"term {q} has shape {a.shape}, expected {shape}", field="matrices")
            asym = abs(a - a.T).max() if a.nnz else 0.0
            scale = abs(a).max() if a.nnz else 0.0
            if asym > SYMMETRY_TOLERANCE * max(scale, 1e-300):
                raise InputRejected(f"term {q} is not symmetric (defect {asym:.3e})", field="matrices")
        for q, theta in enumerate(coefficients):
            if theta.required_dimension > self.domain.dimension:
                raise InputRejected(
                    f"coefficient {q} reads beyond the {self.domain.dimension}-dimensional domain",
                    field="coefficients",
                )
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "matrices", matrices)

    @classmethod
    def from_terms(
        cls,
        terms: Sequence[tuple[CoefficientFunction, sp.spmatrix]],
        domain: ParameterDomain,
    ) -> "AffineOperator":
        return cls(tuple(t for t, _ in terms), tuple(a for _, a in terms), domain)

    @property
    def size(self) -> int:
        """Truth dimension n_h."""
        return self.matrices[0].shape[0]

    @property
    def num_terms(self) -> int:
        return len(self.matrices)

    def evaluate_coefficients(self, mu: Parameter) -> np.ndarray:
        """
        Evaluate (theta_1(mu), ..., theta_Q(mu)) in term order.

        Raises:
            InputRejected: If mu has the wrong dimension
        """
        self.domain.check_dimension(mu)
        return np.array([theta.evaluate(mu) for theta in self.coefficients], dtype=float)

    def assemble(self, mu: Parameter) -> sp.csr_matrix:
        """
        Assemble A(mu) = sum_q theta_q(mu) A_q.

        The sparsity pattern of the result is the union of the term patterns
        (entries are never pruned, even if they cancel).
        """
        self.domain.check(mu)
        return self.combine(self.evaluate_coefficients(mu))

    def combine(self, theta: np.ndarray) -> sp.csr_matrix:
        """Linear combination sum_q theta[q] A_q for given coefficient values."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.num_terms,):
            raise InputRejected(f"expected {self.num_terms} coefficients, got {theta.shape}", field="theta")
        blocks = [a.tocoo() for a in self.matrices]
        rows = np.concatenate([b.row for b in blocks])
        cols = np.concatenate([b.col for b in blocks])
        data = np.concatenate([t * b.data for t, b in zip(theta, blocks)])
        # COO -> CSR sums duplicates but keeps explicit zeros.
        return sp.coo_matrix((data, (rows, cols)), shape=self.matrices[0].shape).tocsr()

    def apply(self, mu: Parameter, v: np.ndarray) -> np.ndarray:
        """A(mu) v computed term by term without assembling."""
        theta = self.evaluate_coefficients(mu)
        return sum(t * (a @ v) for t, a in zip(theta, self.matrices))

    def check_positivity_flags(self) -> None:
        """
        Verify that every coefficient flagged positive is positive on the domain.

        Raises:
            InputRejected: If a flagged coefficient reaches a non-positive value
        """
        for q, theta in enumerate(self.coefficients):
            if theta.positive:
                low = theta.minimum_on(self.domain)
                if low <= 0.0:
                    raise InputRejected(
                        f"coefficient {q} is flagged positive but reaches {low!r} on the domain",
                        field="coefficients",
                    )
