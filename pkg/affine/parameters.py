"""
Parameter points, box domains and training-set sampling.
"""

import itertools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from errors import InputRejected

# Relative slack when checking box membership, absorbs roundoff in sampled values.
BOX_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Parameter:
    """A point mu in R^P."""
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def dimension(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def scaled(self, factor: float) -> "Parameter":
        """Return factor * mu (no domain check)."""
        return Parameter(tuple(factor * v for v in self.values))

    def __str__(self) -> str:
        return "(" + ", ".join(f"{v:.6g}" for v in self.values) + ")"


@dataclass(frozen=True)
class ParameterDomain:
    """
    Axis-aligned box [lower, upper] in R^P.

    Attributes:
        lower: Lower bounds per component
        upper: Upper bounds per component
    """
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) == 0:
            raise InputRejected("domain needs at least one component", field="lower")
        if len(lower) != len(upper):
            raise InputRejected(
                f"lower has {len(lower)} components, upper has {len(upper)}",
                field="upper",
            )
        for i, (lo, hi) in enumerate(zip(lower, upper)):
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise InputRejected(f"invalid bounds [{lo}, {hi}] for component {i}", field="lower")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def uniform(cls, dimension: int, bounds: tuple[float, float]) -> "ParameterDomain":
        """Box with identical bounds on every axis."""
        return cls((bounds[0],) * dimension, (bounds[1],) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def check_dimension(self, mu: Parameter) -> None:
        """
        Reject a parameter of the wrong length.

        Raises:
            InputRejected: If mu has a different dimension than the domain
        """
        if mu.dimension != self.dimension:
            raise InputRejected(
                f"parameter has {mu.dimension} components, domain expects {self.dimension}",
                field="mu",
            )

    def contains(self, mu: Parameter) -> bool:
        if mu.dimension != self.dimension:
            return False
        for v, lo, hi in zip(mu.values, self.lower, self.upper):
            slack = BOX_TOLERANCE * max(1.0, abs(lo), abs(hi))
            if v < lo - slack or v > hi + slack:
                return False
        return True

    def check(self, mu: Parameter) -> None:
        """
        Reject parameters that are not admissible.

        Raises:
            InputRejected: On dimension mismatch or when mu lies outside the box
        """
        self.check_dimension(mu)
        if not self.contains(mu):
            raise InputRejected(
                f"parameter {mu} lies outside the domain box {self.lower} - {self.upper}",
                field="mu",
            )

    def parameter(self, values: Sequence[float]) -> Parameter:
        """Construct a Parameter checked against this domain."""
        mu = Parameter(tuple(values))
        self.check(mu)
        return mu

    def corners(self) -> list[Parameter]:
        """All 2^P vertices of the box."""
        return [Parameter(c) for c in itertools.product(*zip(self.lower, self.upper))]


@dataclass(frozen=True)
class UniformGrid:
    """Tensor grid with k points per axis (box corners included)."""
    points_per_axis: int


@dataclass(frozen=True)
class RandomSampling:
    """n uniformly distributed samples, reproducible from seed."""
    count: int
    seed: int = 0


SamplingStrategy = Union[UniformGrid, RandomSampling]


def sample_training_set(domain: ParameterDomain, strategy: SamplingStrategy) -> list[Parameter]:
    """
    Sample a finite training set from the domain.

    Grid samples are ordered lexicographically with the first component
    varying slowest.

    Args:
        domain: Parameter box
        strategy: UniformGrid(k) with k >= 2 or RandomSampling(n, seed) with n >= 1

    Returns:
        List of parameters inside the box

    Raises:
        InputRejected: For empty or malformed requests
    """
    if isinstance(strategy, UniformGrid):
        k = strategy.points_per_axis
        if k < 2:
            raise InputRejected(f"grid needs at least 2 points per axis, got {k}", field="points_per_axis")
        axes = [
            np.linspace(lo, hi, k) if hi > lo else np.full(k, lo)
            for lo, hi in zip(domain.lower, domain.upper)
        ]
        return [Parameter(tuple(p)) for p in itertools.product(*axes)]

    if isinstance(strategy, RandomSampling):
        if strategy.count < 1:
            raise InputRejected(f"random sampling needs n >= 1, got {strategy.count}", field="count")
        rng = np.random.default_rng(strategy.seed)
        samples = rng.uniform(
            np.asarray(domain.lower), np.asarray(domain.upper),
            size=(strategy.count, domain.dimension),
        )
        return [Parameter(tuple(row)) for row in samples]

    raise InputRejected(f"unknown sampling strategy {strategy!r}", field="strategy")
