"""
Reduced basis and offline projection of a truth problem onto it.

Everything stored in a ReducedModel has dimensions independent of n_h, so
all online evaluations run without touching truth-sized data.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from affine.coefficients import CoefficientFunction
from affine.parameters import Parameter, ParameterDomain
from errors import InputRejected
from truth.linalg import SPDFactor, largest_generalized_eigenvalue
from truth.problem import TruthProblem

logger = logging.getLogger(__name__)

ORTHONORMALITY_TOLERANCE = 1e-8
# Relative defect below which a representer adds nothing to the residual range.
RANGE_TOLERANCE = 1e-14
# Repeat a Gram-Schmidt pass while it shrinks the column below this fraction.
REITERATION_THRESHOLD = 0.1
MAX_REORTHOGONALIZATIONS = 4


@dataclass(frozen=True)
class ReducedBasis:
    """
    X-orthonormal basis V of the reduced space.

    Attributes:
        matrix: (n_h, N) basis columns
        snapshot_parameters: Parameters whose snapshots generated the columns
    """
    matrix: np.ndarray
    snapshot_parameters: tuple[Parameter, ...] = ()

    @classmethod
    def empty(cls, truth_size: int) -> "ReducedBasis":
        return cls(np.zeros((truth_size, 0)))

    @property
    def size(self) -> int:
        return self.matrix.shape[1]

    @property
    def truth_size(self) -> int:
        return self.matrix.shape[0]

    def orthonormality_defect(self, x) -> float:
        """max |V^T X V - I| entrywise."""
        if self.size == 0:
            return 0.0
        gram = self.matrix.T @ (x @ self.matrix)
        return float(np.abs(gram - np.eye(self.size)).max())

    def lift(self, coordinates: np.ndarray) -> np.ndarray:
        """Truth vector V u_N."""
        return self.matrix @ coordinates

    def project(self, x, vector: np.ndarray) -> np.ndarray:
        """Coordinates of the X-orthogonal projection onto span(V)."""
        return self.matrix.T @ (x @ vector)


@dataclass(frozen=True)
class ResidualGram:
    """
    X^{-1} inner products of the Riesz representers of a residual
    r = f - sum_j B_j V c_j.

    The optional range data holds the residual in coordinates of an
    X-orthonormal basis W of span{X^{-1} f, X^{-1} B_j v_n}: range_load = W^T f
    and range_blocks[j] = W^T B_j V. The dual norm is then a Euclidean norm
    of a short vector, accurate down to eps * ||f||_{X'} instead of the
    sqrt(eps) floor of the expanded quadratic form.

    Attributes:
        c_ff: <f, f>_{X^{-1}}
        c_fA: (J, N) with c_fA[j, n] = <f, B_j v_n>_{X^{-1}}
        c_AA: (J, J, N, N) with c_AA[j, k, n, m] = <B_j v_n, B_k v_m>_{X^{-1}}
        range_load: (r,) residual range coordinates of f
        range_blocks: (J, r, N) residual range coordinates of B_j V
    """
    c_ff: float
    c_fA: np.ndarray
    c_AA: np.ndarray
    range_load: Optional[np.ndarray] = None
    range_blocks: Optional[np.ndarray] = None

    @property
    def num_blocks(self) -> int:
        return self.c_fA.shape[0]

    @property
    def range_dimension(self) -> int:
        return 0 if self.range_load is None else self.range_load.shape[0]

    def squared_norm(self, blocks: np.ndarray) -> float:
        """
        Squared dual norm of f - sum_j B_j V blocks[j].

        Without range data the expanded quadratic form is returned raw and
        may come out slightly negative.

        Args:
            blocks: (J', N) coordinate vectors for the first J' operator blocks
        """
        used = blocks.shape[0]
        if self.range_load is not None:
            coordinates = self.range_load - np.einsum("jrn,jn->r", self.range_blocks[:used], blocks)
            return float(coordinates @ coordinates)
        linear = float(np.sum(blocks * self.c_fA[:used]))
        quadratic = float(np.einsum("jn,jknm,km->", blocks, self.c_AA[:used, :used], blocks))
        return self.c_ff - 2.0 * linear + quadratic


def residual_range_basis(x, representers: np.ndarray) -> np.ndarray:
    """
    X-orthonormal basis of the span of the representer columns.

    Gram-Schmidt that repeats the projection while it still removes most of
    a column; columns whose defect falls below RANGE_TOLERANCE times their
    X-norm are dropped.

    Returns:
        (n_h, r) array with r <= number of columns
    """
    n, count = representers.shape
    basis = np.empty((n, count))
    x_basis = np.empty((n, count))
    r = 0
    for j in range(count):
        w = representers[:, j].copy()
        norm = float(np.sqrt(max(w @ (x @ w), 0.0)))
        if norm == 0.0:
            continue
        defect = norm
        for _ in range(MAX_REORTHOGONALIZATIONS):
            if r:
                w -= basis[:, :r] @ (x_basis[:, :r].T @ w)
            previous, defect = defect, float(np.sqrt(max(w @ (x @ w), 0.0)))
            if defect > REITERATION_THRESHOLD * previous:
                break
        if defect <= RANGE_TOLERANCE * norm:
            continue
        xw = x @ w
        basis[:, r] = w / defect
        x_basis[:, r] = xw / defect
        r += 1
    return basis[:, :r]


def residual_range_coordinates(
    x, factor: SPDFactor, representers: np.ndarray, duals: np.ndarray
) -> np.ndarray:
    """
    Coordinates of the representer columns in an X-orthonormal basis of their span.

    With a symmetric factor of X the columns are whitened and passed through a
    Householder QR, whose triangular factor holds the coordinates of every
    column and keeps near-dependent directions. Otherwise the coordinates come
    from residual_range_basis.

    Args:
        x: Inner product matrix
        factor: Factorization of x
        representers: (n_h, k) Riesz representers X^{-1} b_i
        duals: (n_h, k) the dual vectors b_i

    Returns:
        (r, k) coordinates, r <= k
    """
    if representers.shape[1] == 0:
        return np.zeros((0, 0))
    if factor.is_symmetric:
        return np.linalg.qr(factor.whiten(representers), mode="r")
    logger.debug("[project] non-symmetric pivoting; residual range by Gram-Schmidt")
    return residual_range_basis(x, representers).T @ duals


@dataclass(frozen=True)
class ReducedModel:
    """
    Online data of a certified reduced model.

    Attributes:
        coefficients: theta_q carried over from the affine operator
        domain: Parameter domain
        reduced_terms: (Q, N, N) with A_q^N = V^T A_q V
        reduced_load: f^N = V^T f
        reduced_outputs: (S, N) with s^N = s V
        residual_gram: Representer Gram data; Q blocks, plus the mass block
            for parabolic models
        reference_parameter: mu_bar of the min-theta bound
        reference_coercivity: C_ref
        continuity_constants: gamma_q = largest generalized eigenvalue of (A_q, X)
        output_dual_norms: X-dual norms of the output rows
        truth_size: n_h of the truth problem (metadata)
        snapshot_parameters: Parameters behind the basis
        reduced_mass: V^T M V for parabolic models
        initial_coordinates: V^T X u^0 for parabolic models
        initial_defect_mass_sq: ||u^0 - V V^T X u^0||_M^2
        complete: False if written from an aborted offline run
        name: Problem label
    """
    coefficients: tuple[CoefficientFunction, ...]
    domain: ParameterDomain
    reduced_terms: np.ndarray
    reduced_load: np.ndarray
    reduced_outputs: np.ndarray
    residual_gram: ResidualGram
    reference_parameter: Parameter
    reference_coercivity: float
    continuity_constants: np.ndarray
    output_dual_norms: np.ndarray
    truth_size: int
    snapshot_parameters: tuple[Parameter, ...] = ()
    reduced_mass: Optional[np.ndarray] = None
    initial_coordinates: Optional[np.ndarray] = None
    initial_defect_mass_sq: float = 0.0
    complete: bool = True
    name: str = "reduced"

    @property
    def basis_size(self) -> int:
        return self.reduced_load.shape[0]

    @property
    def num_terms(self) -> int:
        return len(self.coefficients)

    @property
    def num_outputs(self) -> int:
        return self.reduced_outputs.shape[0]

    @property
    def is_parabolic(self) -> bool:
        return self.reduced_mass is not None

    def evaluate_coefficients(self, mu: Parameter) -> np.ndarray:
        self.domain.check_dimension(mu)
        return np.array([theta.evaluate(mu) for theta in self.coefficients])

    def with_completion(self, complete: bool) -> "ReducedModel":
        return replace(self, complete=complete)


def continuity_constants(problem: TruthProblem, x_factor: Optional[SPDFactor] = None) -> np.ndarray:
    """gamma_q = ||A_q|| in the X-induced norm, for every term."""
    x = problem.inner_product
    factor = x_factor or SPDFactor(x, context="inner product")
    return np.array([
        largest_generalized_eigenvalue(a_q, x, factor) for a_q in problem.operator.matrices
    ])


def project(
    problem: TruthProblem,
    basis: ReducedBasis,
    *,
    include_mass: bool = False,
    initial: Optional[np.ndarray] = None,
    continuity: Optional[np.ndarray] = None,
    x_factor: Optional[SPDFactor] = None,
) -> ReducedModel:
    """
    Galerkin-project the truth problem and precompute the residual Gram data.

    One factorization of X serves all Q*N + 1 Riesz solves (plus N for the
    mass block of parabolic problems); representers are discarded after
    their inner products are formed.

    Args:
        problem: Truth problem
        basis: X-orthonormal reduced basis (may be empty)
        include_mass: Add the mass block and initial data for parabolic solves
        initial: Initial state of parabolic solves (zero if omitted)
        continuity: Precomputed gamma_q (computed here if omitted)
        x_factor: Precomputed factorization of X

    Returns:
        ReducedModel

    Raises:
        InputRejected: If the basis is not X-orthonormal or has the wrong row count,
            or a mass block is requested for a problem without mass matrix
    """
    x = problem.inner_product
    v = basis.matrix
    if basis.truth_size != problem.size:
        raise InputRejected(
            f"basis has {basis.truth_size} rows, truth dimension is {problem.size}", field="basis"
        )
    defect = basis.orthonormality_defect(x)
    if defect > ORTHONORMALITY_TOLERANCE:
        raise InputRejected(f"basis is not X-orthonormal (defect {defect:.3e})", field="basis")

    factor = x_factor or SPDFactor(x, context="inner product")
    if continuity is None:
        continuity = continuity_constants(problem, factor)

    applied = [a_q @ v for a_q in problem.operator.matrices]
    mass = problem.mesh.mass_matrix if include_mass else None
    if include_mass and mass is None:
        raise InputRejected("problem has no mass matrix", field="mass_matrix")
    if mass is not None:
        applied.append(mass @ v)
    representers = [factor.solve(b) for b in applied]
    f_representer = factor.solve(problem.load)

    num_blocks = len(applied)
    n = basis.size
    c_fA = np.array([b.T @ f_representer for b in applied]).reshape(num_blocks, n)
    c_AA = np.empty((num_blocks, num_blocks, n, n))
    for j in range(num_blocks):
        for k in range(j, num_blocks):
            block = applied[j].T @ representers[k]
            c_AA[j, k] = block
            c_AA[k, j] = block.T
    range_coordinates = residual_range_coordinates(
        x, factor,
        np.column_stack([f_representer, *representers]),
        np.column_stack([problem.load, *applied]),
    )
    r = range_coordinates.shape[0]
    gram = ResidualGram(
        c_ff=float(problem.load @ f_representer),
        c_fA=c_fA,
        c_AA=c_AA,
        range_load=range_coordinates[:, 0],
        range_blocks=range_coordinates[:, 1:].reshape(r, num_blocks, n).transpose(1, 0, 2),
    )

    output_representers = factor.solve(problem.outputs.T).reshape(problem.size, -1)
    output_dual_norms = np.sqrt(np.maximum(
        np.einsum("is,si->s", output_representers, problem.outputs), 0.0
    ))

    reduced_mass = None
    initial_coordinates = None
    initial_defect = 0.0
    if mass is not None:
        reduced_mass = v.T @ (mass @ v)
        if initial is not None:
            initial_coordinates = basis.project(x, initial)
            residual = initial - v @ initial_coordinates
            initial_defect = max(float(residual @ (mass @ residual)), 0.0)
        else:
            initial_coordinates = np.zeros(n)

    logger.debug(f"[project] {problem.name}: N={n}, Q={problem.operator.num_terms}, blocks={num_blocks}")
    return ReducedModel(
        coefficients=problem.operator.coefficients,
        domain=problem.domain,
        reduced_terms=np.array([v.T @ b for b in applied[:problem.operator.num_terms]]).reshape(
            problem.operator.num_terms, n, n
        ),
        reduced_load=v.T @ problem.load,
        reduced_outputs=problem.outputs @ v,
        residual_gram=gram,
        reference_parameter=problem.reference_parameter,
        reference_coercivity=problem.reference_coercivity,
        continuity_constants=np.asarray(continuity, dtype=float),
        output_dual_norms=output_dual_norms,
        truth_size=problem.size,
        snapshot_parameters=basis.snapshot_parameters,
        reduced_mass=reduced_mass,
        initial_coordinates=initial_coordinates,
        initial_defect_mass_sq=initial_defect,
        name=problem.name,
    )
