"""
Reduced implicit Euler and its time-integrated residual estimator.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from affine.parameters import Parameter
from errors import InputRejected
from reduced.model import ReducedModel
from reduced.online import clamped_norm, cholesky, coercivity_lower_bound, reduced_matrix
from truth.solvers import count_steps

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReducedTrajectory:
    """
    Reduced states and the estimator data of one parabolic solve.

    Attributes:
        coordinates: (K+1, N) reduced states, row 0 is the projected initial state
        dt: Time step
        parameter: Parameter of the solve
        step_indicators: eta_k = ||r^k||_{X'} / alpha_LB for k = 1..K
        coercivity_lb: alpha_LB(mu)
        initial_term: ||e^0||_M^2 / alpha_LB
    """
    coordinates: np.ndarray
    dt: float
    parameter: Parameter
    step_indicators: np.ndarray
    coercivity_lb: float
    initial_term: float

    @property
    def num_steps(self) -> int:
        return self.coordinates.shape[0] - 1

    @property
    def error_surrogate(self) -> float:
        """sqrt(||e^0||_M^2/alpha + sum_k dt eta_k^2), bounds sqrt(sum_k dt ||e^k||_X^2)."""
        return float(np.sqrt(self.initial_term + self.dt * np.sum(self.step_indicators ** 2)))


def solve_reduced_parabolic(
    model: ReducedModel, mu: Parameter, dt: float, t_final: float
) -> ReducedTrajectory:
    """
    Implicit Euler in the reduced space with the truth time step.

    Each step solves (M_N + dt A_N(mu)) u^{k+1} = M_N u^k + dt f_N and
    evaluates the dual norm of the full residual
    f - A(mu) V u^{k+1} - M V (u^{k+1} - u^k)/dt from the Gram data.

    Raises:
        InputRejected: If the model has no mass data or mu is inadmissible
        ReducedCoercivityLoss: If the reduced step matrix fails Cholesky
    """
    if not model.is_parabolic:
        raise InputRejected("reduced model carries no mass matrix", field="model")
    model.domain.check(mu)
    steps = count_steps(dt, t_final)
    n = model.basis_size
    theta = model.evaluate_coefficients(mu)
    alpha = coercivity_lower_bound(model, mu)
    gram = model.residual_gram

    states = np.zeros((steps + 1, n))
    if model.initial_coordinates is not None:
        states[0] = model.initial_coordinates

    factor = None
    if n > 0:
        factor = cholesky(model.reduced_mass + dt * reduced_matrix(model, theta), mu)

    indicators = np.empty(steps)
    for k in range(steps):
        previous = states[k]
        if factor is not None:
            states[k + 1] = sla.cho_solve(factor, model.reduced_mass @ previous + dt * model.reduced_load)
        velocity = (states[k + 1] - previous) / dt
        blocks = np.vstack([theta[:, None] * states[k + 1][None, :], velocity[None, :]])
        indicators[k] = clamped_norm(gram.squared_norm(blocks), mu) / alpha

    return ReducedTrajectory(
        coordinates=states,
        dt=dt,
        parameter=mu,
        step_indicators=indicators,
        coercivity_lb=alpha,
        initial_term=model.initial_defect_mass_sq / alpha,
    )
