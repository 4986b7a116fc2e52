"""
Greedy reduced-basis construction.

Provides:
- GreedyConfig with the training set and stopping rules
- run_greedy: weak greedy driven by the certified error bound, with a
  strong (true-error) variant for validation runs
- weak_greedy_gamma: computable weak-greedy parameter over a training set

The training-set sweep runs on a ParameterSweep; selection and basis
extension stay sequential.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from affine.parameters import Parameter
from errors import GreedyAborted, InputRejected, LinearDependence, ReducedBasisError
from offline.orthonormalize import orthonormalize_extend
from offline.sweep import ParameterSweep
from offline.trace import GreedyIteration, GreedyTrace
from reduced.model import ReducedBasis, ReducedModel, continuity_constants, project
from reduced.online import (
    coercivity_lower_bound,
    continuity_upper_bound,
    solve_and_certify,
    solve_reduced,
)
from truth.linalg import SPDFactor, x_norm
from truth.problem import TruthProblem
from truth.solvers import solve_truth

logger = logging.getLogger(__name__)


class GreedyMode(Enum):
    """Selection criterion."""
    WEAK = "weak"  # certified error bound
    STRONG = "strong"  # true error, validation only


@dataclass(frozen=True)
class GreedyConfig:
    """
    Greedy run configuration.

    Attributes:
        training_set: Finite training set, order fixes tie-breaking
        max_basis_size: Upper limit on N
        target_error: Stop once the max estimate is at or below this value
        pod_modes_per_iter: Modes appended per POD-Greedy iteration
        seed_parameter: First snapshot parameter (bootstrap with u_N = 0 otherwise)
        mode: Weak (estimator) or strong (true error) selection
        validation_set: Held-out parameters for true-error logging
        threads: Sweep workers
    """
    training_set: tuple[Parameter, ...]
    max_basis_size: int
    target_error: float
    pod_modes_per_iter: int = 1
    seed_parameter: Optional[Parameter] = None
    mode: GreedyMode = GreedyMode.WEAK
    validation_set: tuple[Parameter, ...] = ()
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "training_set", tuple(self.training_set))
        object.__setattr__(self, "validation_set", tuple(self.validation_set))
        object.__setattr__(self, "mode", GreedyMode(self.mode))
        if not self.training_set:
            raise InputRejected("training set is empty", field="training_set")
        if self.max_basis_size < 1:
            raise InputRejected(f"max_basis_size must be >= 1, got {self.max_basis_size}", field="max_basis_size")
        if not self.target_error > 0.0:
            raise InputRejected(f"target_error must be positive, got {self.target_error}", field="target_error")
        if self.pod_modes_per_iter < 1:
            raise InputRejected(
                f"pod_modes_per_iter must be >= 1, got {self.pod_modes_per_iter}", field="pod_modes_per_iter"
            )
        if self.threads < 1:
            raise InputRejected(f"threads must be >= 1, got {self.threads}", field="threads")

    def check_against(self, problem: TruthProblem) -> None:
        """Reject parameters outside the problem domain before any computation."""
        for mu in self.training_set + self.validation_set:
            problem.domain.check(mu)
        if self.seed_parameter is not None:
            problem.domain.check(self.seed_parameter)


def select_argmax(errors: np.ndarray) -> int:
    """Index of the maximum; ties go to the lowest index."""
    return int(np.argmax(errors))


def reduced_true_error(problem: TruthProblem, basis: ReducedBasis, model: ReducedModel,
                       mu: Parameter, truth: np.ndarray) -> float:
    """||u(mu) - V u_N(mu)||_X."""
    coordinates = solve_reduced(model, mu).coordinates
    return x_norm(problem.inner_product, truth - basis.lift(coordinates))


class _TruthCache:
    """Truth solutions over a fixed parameter list, computed once."""

    def __init__(self, problem: TruthProblem, parameters: Sequence[Parameter], sweep: ParameterSweep):
        self.parameters = list(parameters)
        self.solutions = sweep.map(lambda mu: solve_truth(problem, mu).coefficients, self.parameters)

    def __getitem__(self, index: int) -> np.ndarray:
        return self.solutions[index]


def _max_true_error(problem, basis, model, cache: Optional[_TruthCache]) -> Optional[float]:
    if cache is None:
        return None
    return max(
        reduced_true_error(problem, basis, model, mu, truth)
        for mu, truth in zip(cache.parameters, cache.solutions)
    )


def run_greedy(
    problem: TruthProblem, config: GreedyConfig
) -> tuple[ReducedBasis, ReducedModel, GreedyTrace]:
    """
    Weak greedy basis construction.

    Each iteration projects the current basis, evaluates the error bound
    over the training set, and stops on reaching the target, a full basis
    or a linearly dependent snapshot; otherwise the truth solution at the
    argmax is appended to the basis. The last trace record carries the
    error of the returned model and no selection.

    Args:
        problem: Coercive truth problem
        config: Greedy configuration

    Returns:
        (basis, model, trace)

    Raises:
        InputRejected: If a configured parameter lies outside the domain
        GreedyAborted: On any estimator or solver failure, with the partial state
    """
    config.check_against(problem)
    x = problem.inner_product
    sweep = ParameterSweep(config.threads)
    trace = GreedyTrace(list(config.training_set))
    basis = ReducedBasis.empty(problem.size)
    model = None

    try:
        factor = SPDFactor(x, context="inner product")
        gamma = continuity_constants(problem, factor)
        training_truth = (
            _TruthCache(problem, config.training_set, sweep) if config.mode is GreedyMode.STRONG else None
        )
        validation_truth = (
            _TruthCache(problem, config.validation_set, sweep) if config.validation_set else None
        )
        logger.info(
            f"[greedy] {problem.name}: {len(config.training_set)} training parameters, "
            f"mode={config.mode.value}, N_max={config.max_basis_size}, target={config.target_error:.3e}"
        )

        iteration = 0
        while True:
            model = project(problem, basis, continuity=gamma, x_factor=factor)
            if training_truth is None:
                errors = np.array(sweep.map(
                    lambda mu, m=model: solve_and_certify(m, mu)[1].error_bound, config.training_set
                ))
            else:
                errors = np.array([
                    reduced_true_error(problem, basis, model, mu, truth)
                    for mu, truth in zip(training_truth.parameters, training_truth.solutions)
                ])
            index = select_argmax(errors)
            max_error = float(errors[index])
            true_error = _max_true_error(problem, basis, model, validation_truth)

            stop = None
            if max_error <= config.target_error:
                stop = "target"
            elif basis.size >= config.max_basis_size:
                stop = "max_size"

            seeded = iteration == 0 and config.seed_parameter is not None
            selected = config.seed_parameter if seeded else config.training_set[index]
            if stop is None:
                if training_truth is not None and not seeded:
                    snapshot = training_truth[index]
                else:
                    snapshot = solve_truth(problem, selected).coefficients
                try:
                    basis = orthonormalize_extend(basis, snapshot, x, selected)
                except LinearDependence as e:
                    logger.warning(f"[greedy] stopping: snapshot at mu={selected} rejected ({e})")
                    stop = "dependence"

            if stop is not None:
                trace.record(GreedyIteration(iteration, None, max_error, basis.size, true_error), errors)
                trace.stop_reason = stop
                break

            trace.record(
                GreedyIteration(iteration, selected, max_error, basis.size, true_error, 1, seeded), errors
            )
            logger.info(
                f"[greedy] iteration {iteration}: max estimate {max_error:.3e}, "
                f"selected mu={selected}, N={basis.size}"
            )
            iteration += 1

    except ReducedBasisError as e:
        trace.stop_reason = "aborted"
        partial = partial_model(problem, basis)
        logger.error(f"[greedy] aborted at N={basis.size}: {e}")
        raise GreedyAborted(e, trace, basis, partial) from e

    envelope = trace.envelope()
    if envelope[-1] < trace.final_error:
        logger.info(
            f"[greedy] max estimate is not monotone: best {envelope[-1]:.3e} at "
            f"N={int(np.argmin(trace.max_errors))}, final {trace.final_error:.3e}"
        )
    logger.info(
        f"[greedy] finished ({trace.stop_reason}): N={basis.size}, max estimate {trace.final_error:.3e}"
    )
    return basis, model, trace


def partial_model(problem: TruthProblem, basis: ReducedBasis, **kwargs) -> Optional[ReducedModel]:
    """Best-effort projection of an interrupted run, flagged incomplete."""
    try:
        return project(problem, basis, **kwargs).with_completion(False)
    except ReducedBasisError as e:
        logger.warning(f"[greedy] partial model unavailable: {e}")
        return None


def weak_greedy_gamma(model: ReducedModel, training_set: Sequence[Parameter]) -> float:
    """
    min over the training set of (continuity UB / coercivity LB)^-2.

    A computable lower estimate of the weak-greedy parameter; uses only
    offline constants, so any basis size works.
    """
    if not training_set:
        raise InputRejected("training set is empty", field="training_set")
    ratios = [
        continuity_upper_bound(model, mu) / coercivity_lower_bound(model, mu) for mu in training_set
    ]
    return float(max(ratios) ** -2)
