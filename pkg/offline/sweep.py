"""
Parameter sweeps over training sets.

Features:
- Ordered results regardless of thread count
- Thread pool for threads > 1, plain loop otherwise
- First failure (in training-set order) propagates with its index
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

from affine.parameters import Parameter
from errors import ReducedBasisError

logger = logging.getLogger(__name__)

T = TypeVar("T")


class SweepFailed(ReducedBasisError):
    """Evaluation failed at one parameter of a sweep."""

    def __init__(self, index: int, parameter: Parameter, cause: Exception):
        self.index = index
        self.parameter = parameter
        self.cause = cause
        super().__init__(f"evaluation failed at training index {index}, mu={parameter}: {cause}")


class ParameterSweep:
    """
    Maps a pure function over a list of parameters.

    The callable must not mutate shared state; reduced models and truth
    problems are immutable, so estimator and truth evaluations qualify.
    """

    def __init__(self, threads: int = 1):
        """
        Args:
            threads: Worker count; 1 runs sequentially
        """
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        self.threads = threads

    def map(self, fn: Callable[[Parameter], T], parameters: Sequence[Parameter]) -> list[T]:
        """
        Evaluate fn at every parameter, results in input order.

        Raises:
            SweepFailed: Wrapping the first failure in input order
        """
        def guarded(item: tuple[int, Parameter]) -> T:
            index, mu = item
            try:
                return fn(mu)
            except Exception as e:
                raise SweepFailed(index, mu, e) from e

        items = list(enumerate(parameters))
        if self.threads == 1 or len(items) < 2:
            return [guarded(item) for item in items]

        with ThreadPoolExecutor(max_workers=self.threads, thread_name_prefix="sweep") as pool:
            # Executor.map yields in submission order and re-raises the first failure in that order.
            return list(pool.map(guarded, items))
