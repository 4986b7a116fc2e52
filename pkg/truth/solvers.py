"""
Truth solvers: stationary sparse-direct solve and implicit Euler stepping.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from affine.parameters import Parameter
from artifacts.store import format_float, open_csv
from errors import InputRejected
from truth.linalg import SPDFactor
from truth.problem import TruthProblem

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-10
STEP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TruthSolution:
    """Nodal coefficients of u_mu."""
    coefficients: np.ndarray
    parameter: Parameter


@dataclass(frozen=True)
class Trajectory:
    """
    Implicit Euler trajectory u^0, ..., u^K.

    Attributes:
        states: (K + 1, n_h) array, states[0] is the initial condition
        dt: Time step
        t_final: K * dt
        parameter: Parameter the trajectory was computed for
    """
    states: np.ndarray
    dt: float
    t_final: float
    parameter: Parameter

    @property
    def num_steps(self) -> int:
        return self.states.shape[0] - 1

    def times(self) -> np.ndarray:
        return np.arange(self.num_steps + 1) * self.dt

    def to_csv(self, path: str | Path) -> None:
        """One row per time step: step, time, then the state coefficients."""
        header = ["step", "time"] + [f"u{i}" for i in range(self.states.shape[1])]
        with open_csv(path, header) as writer:
            for k, (t, state) in enumerate(zip(self.times(), self.states)):
                writer.writerow([k, format_float(t)] + [format_float(v) for v in state])


def solve_truth(problem: TruthProblem, mu: Parameter) -> TruthSolution:
    """
    Solve A(mu) u = f with a sparse symmetric factorization.

    Raises:
        InputRejected: If mu is not admissible
        CoercivityLoss: If A(mu) is not positive definite
    """
    matrix = problem.operator.assemble(mu)
    factor = SPDFactor(matrix, context=mu)
    u = factor.solve(problem.load)

    f_norm = float(np.linalg.norm(problem.load))
    residual = float(np.linalg.norm(matrix @ u - problem.load))
    if residual > RESIDUAL_TOLERANCE * max(f_norm, 1e-300) and f_norm > 0.0:
        logger.warning(f"[truth] residual {residual:.3e} above tolerance at mu={mu}")
    return TruthSolution(coefficients=u, parameter=mu)


def count_steps(dt: float, t_final: float) -> int:
    """
    Number of steps K with K * dt = t_final.

    Raises:
        InputRejected: If dt <= 0 or t_final is not a positive multiple of dt
    """
    if not dt > 0.0:
        raise InputRejected(f"time step must be positive, got {dt}", field="dt")
    if not t_final > 0.0:
        raise InputRejected(f"final time must be positive, got {t_final}", field="t_final")
    steps = int(round(t_final / dt))
    if steps < 1 or abs(steps * dt - t_final) > STEP_TOLERANCE * t_final:
        raise InputRejected(f"t_final={t_final} is not a multiple of dt={dt}", field="t_final")
    return steps


def solve_parabolic(
    problem: TruthProblem,
    mu: Parameter,
    dt: float,
    t_final: float,
    initial: Optional[np.ndarray] = None,
) -> Trajectory:
    """
    Implicit Euler for M du/dt + A(mu) u = f.

    Each step solves (M + dt A(mu)) u^{k+1} = M u^k + dt f with one
    factorization per call.

    Args:
        problem: Truth problem carrying a mass matrix
        mu: Parameter
        dt: Time step
        t_final: Final time, a multiple of dt
        initial: Initial state (zero if omitted)

    Returns:
        Trajectory with K + 1 states

    Raises:
        InputRejected: On invalid time stepping data or missing mass matrix
        CoercivityLoss: If the step matrix is not positive definite
    """
    if problem.mesh.mass_matrix is None:
        raise InputRejected("problem has no mass matrix", field="mass_matrix")
    steps = count_steps(dt, t_final)
    mass = problem.mesh.mass_matrix
    u = np.zeros(problem.size) if initial is None else np.asarray(initial, dtype=float).copy()
    if u.shape != (problem.size,):
        raise InputRejected(f"initial state has shape {u.shape}", field="initial")

    factor = SPDFactor(mass + dt * problem.operator.assemble(mu), context=mu)
    forcing = dt * problem.load

    states = np.empty((steps + 1, problem.size))
    states[0] = u
    for k in range(steps):
        u = factor.solve(mass @ u + forcing)
        states[k + 1] = u

    logger.debug(f"[truth] parabolic solve at mu={mu}: {steps} steps of dt={dt}")
    return Trajectory(states=states, dt=dt, t_final=steps * dt, parameter=mu)
