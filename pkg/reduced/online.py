"""
Online stage: reduced solve, residual-based error estimator and certificates.

Provides:
- solve_reduced: Galerkin solve in the reduced space
- residual_dual_norm: X-dual residual norm from the precomputed Gram data
- coercivity_lower_bound / continuity_upper_bound: min-theta style constants
- certify: rigorous state and output error bounds

Every function here is a pure function of the ReducedModel and the
parameter; none of them touches data of the truth dimension.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
import scipy.linalg as sla

from affine.parameters import Parameter
from errors import InputRejected, MinThetaInapplicable, ReducedCoercivityLoss
from reduced.model import ReducedModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReducedSolution:
    """Reduced coordinates u_N at a parameter, with the output values s^N u_N."""
    coordinates: np.ndarray
    parameter: Parameter
    outputs: np.ndarray


@dataclass(frozen=True)
class Certificate:
    """
    Certified error information for one reduced solution.

    error_bound equals residual_dual_norm / coercivity_lb exactly.
    """
    parameter: Parameter
    outputs: np.ndarray
    error_bound: float
    output_bound: np.ndarray
    coercivity_lb: float
    residual_dual_norm: float

    def to_record(self) -> Dict[str, Any]:
        """JSON-ready record."""
        return {
            "mu": list(self.parameter.values),
            "outputs": [float(s) for s in self.outputs],
            "error_bound": float(self.error_bound),
            "output_bounds": [float(b) for b in self.output_bound],
            "coercivity_lb": float(self.coercivity_lb),
            "residual_norm": float(self.residual_dual_norm),
        }


def reduced_matrix(model: ReducedModel, theta: np.ndarray) -> np.ndarray:
    """A^N = sum_q theta_q A_q^N."""
    return np.tensordot(theta, model.reduced_terms, axes=1)


def cholesky(matrix: np.ndarray, mu: Parameter) -> tuple[np.ndarray, bool]:
    """
    Cholesky factor of a reduced SPD matrix.

    Raises:
        ReducedCoercivityLoss: If the matrix is not positive definite
    """
    try:
        return sla.cho_factor(matrix, lower=False, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ReducedCoercivityLoss(mu, matrix.shape[0]) from e


def solve_reduced(model: ReducedModel, mu: Parameter) -> ReducedSolution:
    """
    Solve the Galerkin-reduced system A^N(mu) u_N = f^N.

    Args:
        model: Reduced model
        mu: Admissible parameter

    Returns:
        ReducedSolution with coordinates and outputs

    Raises:
        InputRejected: If mu is not admissible
        ReducedCoercivityLoss: If A^N(mu) fails Cholesky
    """
    model.domain.check(mu)
    if model.basis_size == 0:
        return ReducedSolution(np.zeros(0), mu, np.zeros(model.num_outputs))

    theta = model.evaluate_coefficients(mu)
    factor = cholesky(reduced_matrix(model, theta), mu)
    coordinates = sla.cho_solve(factor, model.reduced_load)
    return ReducedSolution(coordinates, mu, model.reduced_outputs @ coordinates)


def clamped_norm(raw: float, mu: Parameter) -> float:
    """sqrt(raw) with negative roundoff clamped to 0."""
    if raw < 0.0:
        logger.debug(f"[online] residual quadratic form evaluated to {raw!r} at mu={mu}; clamped to 0")
        return 0.0
    return float(np.sqrt(raw))


def residual_dual_norm(model: ReducedModel, mu: Parameter, u_n: np.ndarray) -> float:
    """
    ||f - A(mu) V u_N||_{X'} from the offline data in O(Q^2 N^2).

    Models projected here carry residual range coordinates, so the norm is
    a Euclidean norm of a short vector. For Gram-only models the quadratic
    form can come out slightly negative near a zero residual; the raw value
    is logged at debug level and the result clamped to zero.
    """
    u_n = np.asarray(u_n, dtype=float).reshape(-1)
    if u_n.shape != (model.basis_size,):
        raise InputRejected(f"u_N has length {u_n.size}, basis size is {model.basis_size}", field="u_N")
    theta = model.evaluate_coefficients(mu)
    blocks = theta[:, None] * u_n[None, :]
    return clamped_norm(model.residual_gram.squared_norm(blocks), mu)


def coercivity_lower_bound(model: ReducedModel, mu: Parameter) -> float:
    """
    Min-theta bound C_ref * min_q theta_q(mu) / theta_q(mu_bar).

    Raises:
        MinThetaInapplicable: If a coefficient is not flagged positive or is
            non-positive at mu or at the reference parameter
    """
    theta = model.evaluate_coefficients(mu)
    theta_ref = model.evaluate_coefficients(model.reference_parameter)
    for q, coefficient in enumerate(model.coefficients):
        if not coefficient.positive:
            raise MinThetaInapplicable(mu, q, float(theta[q]))
        if theta[q] <= 0.0:
            raise MinThetaInapplicable(mu, q, float(theta[q]))
        if theta_ref[q] <= 0.0:
            raise MinThetaInapplicable(model.reference_parameter, q, float(theta_ref[q]))
    return float(model.reference_coercivity * np.min(theta / theta_ref))


def continuity_upper_bound(model: ReducedModel, mu: Parameter) -> float:
    """sum_q |theta_q(mu)| gamma_q."""
    theta = model.evaluate_coefficients(mu)
    return float(np.abs(theta) @ model.continuity_constants)


def certify(model: ReducedModel, mu: Parameter, solution: ReducedSolution) -> Certificate:
    """
    Rigorous bounds for a reduced solution.

    error_bound = ||r||_{X'} / alpha_LB bounds ||u(mu) - V u_N||_X and
    output_bound[i] = ||s_i||_{X'} * error_bound bounds |s_i(u) - s_i^N|.

    Raises:
        InputRejected: If the solution was computed for another parameter
        MinThetaInapplicable: Propagated from the coercivity bound
    """
    if solution.parameter != mu:
        raise InputRejected(f"solution was computed for mu={solution.parameter}, not {mu}", field="solution")
    model.domain.check(mu)
    residual = residual_dual_norm(model, mu, solution.coordinates)
    alpha = coercivity_lower_bound(model, mu)
    error_bound = residual / alpha
    return Certificate(
        parameter=mu,
        outputs=solution.outputs,
        error_bound=error_bound,
        output_bound=model.output_dual_norms * error_bound,
        coercivity_lb=alpha,
        residual_dual_norm=residual,
    )


def solve_and_certify(model: ReducedModel, mu: Parameter) -> tuple[ReducedSolution, Certificate]:
    """Convenience wrapper used by sweeps and the CLI."""
    solution = solve_reduced(model, mu)
    return solution, certify(model, mu, solution)
