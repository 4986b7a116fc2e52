"""
POD-Greedy for parabolic problems.

Selects the parameter with the largest time-integrated error surrogate,
computes its truth trajectory and appends the leading POD modes of the
trajectory's projection defect.
"""

import logging
from typing import Optional

import numpy as np

from affine.parameters import Parameter
from errors import GreedyAborted, InputRejected, ReducedBasisError
from offline.greedy import GreedyConfig, partial_model, select_argmax
from offline.orthonormalize import orthonormalize_columns
from offline.pod import pod
from offline.sweep import ParameterSweep
from offline.trace import GreedyIteration, GreedyTrace
from reduced.model import ReducedBasis, ReducedModel, continuity_constants, project
from reduced.parabolic import solve_reduced_parabolic
from truth.linalg import SPDFactor, x_norms
from truth.problem import TruthProblem
from truth.solvers import count_steps, solve_parabolic

logger = logging.getLogger(__name__)


def trajectory_error(
    problem: TruthProblem, basis: ReducedBasis, model: ReducedModel,
    mu: Parameter, states: np.ndarray, dt: float, t_final: float,
) -> float:
    """sqrt(sum_k dt ||u^k - V u_N^k||_X^2) over k = 1..K, the quantity the surrogate bounds."""
    reduced = solve_reduced_parabolic(model, mu, dt, t_final)
    errors = states[1:] - reduced.coordinates[1:] @ basis.matrix.T
    return float(np.sqrt(dt * np.sum(x_norms(problem.inner_product, errors.T) ** 2)))


def run_pod_greedy(
    problem: TruthProblem,
    config: GreedyConfig,
    dt: float,
    t_final: float,
    initial: Optional[np.ndarray] = None,
) -> tuple[ReducedBasis, ReducedModel, GreedyTrace]:
    """
    POD-Greedy basis construction with implicit Euler in time.

    Args:
        problem: Truth problem with a mass matrix
        config: Greedy configuration; pod_modes_per_iter modes per iteration
        dt: Time step shared by truth and reduced solves
        t_final: Final time
        initial: Initial state (zero if omitted)

    Returns:
        (basis, model, trace); trace errors are surrogate values

    Raises:
        InputRejected: If the problem is not parabolic or inputs are invalid
        GreedyAborted: On solver or estimator failure, with the partial state
    """
    if not problem.is_parabolic:
        raise InputRejected("POD-Greedy needs a problem with a mass matrix", field="problem")
    config.check_against(problem)
    count_steps(dt, t_final)
    initial = np.zeros(problem.size) if initial is None else np.asarray(initial, dtype=float)
    if initial.shape != (problem.size,):
        raise InputRejected(f"initial state has shape {initial.shape}", field="initial")

    x = problem.inner_product
    sweep = ParameterSweep(config.threads)
    trace = GreedyTrace(list(config.training_set))
    basis = ReducedBasis.empty(problem.size)
    model = None

    try:
        factor = SPDFactor(x, context="inner product")
        gamma = continuity_constants(problem, factor)
        validation = [
            (mu, solve_parabolic(problem, mu, dt, t_final, initial).states) for mu in config.validation_set
        ]
        logger.info(
            f"[pod_greedy] {problem.name}: {len(config.training_set)} training parameters, "
            f"{config.pod_modes_per_iter} mode(s) per iteration, dt={dt}, T={t_final}"
        )

        iteration = 0
        while True:
            model = project(
                problem, basis, include_mass=True, initial=initial, continuity=gamma, x_factor=factor
            )
            errors = np.array(sweep.map(
                lambda mu, m=model: solve_reduced_parabolic(m, mu, dt, t_final).error_surrogate,
                config.training_set,
            ))
            index = select_argmax(errors)
            max_error = float(errors[index])
            true_error = None
            if validation:
                true_error = max(
                    trajectory_error(problem, basis, model, mu, states, dt, t_final)
                    for mu, states in validation
                )

            stop = None
            if max_error <= config.target_error:
                stop = "target"
            elif basis.size >= config.max_basis_size:
                stop = "max_size"

            seeded = iteration == 0 and config.seed_parameter is not None
            selected = config.seed_parameter if seeded else config.training_set[index]
            added = 0
            if stop is None:
                states = solve_parabolic(problem, selected, dt, t_final, initial).states.T
                defects = states - basis.matrix @ (basis.matrix.T @ (x @ states))
                budget = min(config.pod_modes_per_iter, config.max_basis_size - basis.size)
                modes = pod(defects, x, budget).modes
                extended = orthonormalize_columns(modes, x, basis, selected)
                added = extended.size - basis.size
                if added == 0:
                    logger.warning(f"[pod_greedy] stopping: trajectory at mu={selected} adds no modes")
                    stop = "dependence"
                basis = extended

            if stop is not None:
                trace.record(GreedyIteration(iteration, None, max_error, basis.size, true_error), errors)
                trace.stop_reason = stop
                break

            trace.record(
                GreedyIteration(iteration, selected, max_error, basis.size, true_error, added, seeded), errors
            )
            logger.info(
                f"[pod_greedy] iteration {iteration}: max surrogate {max_error:.3e}, "
                f"selected mu={selected}, +{added} mode(s), N={basis.size}"
            )
            iteration += 1

    except ReducedBasisError as e:
        trace.stop_reason = "aborted"
        partial = partial_model(problem, basis, include_mass=True, initial=initial)
        logger.error(f"[pod_greedy] aborted at N={basis.size}: {e}")
        raise GreedyAborted(e, trace, basis, partial) from e

    logger.info(
        f"[pod_greedy] finished ({trace.stop_reason}): N={basis.size}, max surrogate {trace.final_error:.3e}"
    )
    return basis, model, trace
