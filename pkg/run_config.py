"""
Run configuration documents for the command-line interface.

A run is described by one JSON file validated in full before any
computation starts. Every section forbids unknown keys.

Sections:
- problem: thermal_block | parabolic_thermal | advection_demo
- greedy: training strategy, basis size, target, POD modes, seed
- output: artifact directory
- validation: test-set strategy and held-out error logging
"""

import logging
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from affine.parameters import (
    Parameter,
    ParameterDomain,
    RandomSampling,
    SamplingStrategy,
    UniformGrid,
    sample_training_set,
)
from offline.greedy import GreedyConfig, GreedyMode
from truth.problem import TruthProblem
from truth.solvers import STEP_TOLERANCE, solve_truth
from truth.thermal_block import build_thermal_block

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridSampling(_Section):
    strategy: Literal["grid"] = "grid"
    points_per_axis: int = Field(3, ge=2)

    def to_strategy(self) -> SamplingStrategy:
        return UniformGrid(self.points_per_axis)


class RandomSamplingConfig(_Section):
    strategy: Literal["random"] = "random"
    count: int = Field(100, ge=1)
    seed: int = 0

    def to_strategy(self) -> SamplingStrategy:
        return RandomSampling(self.count, self.seed)


Sampling = Annotated[Union[GridSampling, RandomSamplingConfig], Field(discriminator="strategy")]


class _ThermalGeometry(_Section):
    blocks_x: int = Field(2, ge=1)
    blocks_y: int = Field(2, ge=1)
    cells_per_axis: int = Field(32, ge=1)
    mu_bounds: Tuple[float, float] = (0.1, 10.0)
    source: float = 1.0

    @model_validator(mode="after")
    def _check_layout(self):
        if self.cells_per_axis % self.blocks_x or self.cells_per_axis % self.blocks_y:
            raise ValueError(
                f"cells_per_axis={self.cells_per_axis} must be divisible by blocks_x and blocks_y"
            )
        lo, hi = self.mu_bounds
        if not 0.0 < lo < hi:
            raise ValueError(f"mu_bounds must satisfy 0 < lower < upper, got {self.mu_bounds}")
        return self

    def build(self) -> TruthProblem:
        return build_thermal_block(
            self.blocks_x, self.blocks_y, self.cells_per_axis, self.mu_bounds, self.source
        )


class ThermalBlockProblem(_ThermalGeometry):
    type: Literal["thermal_block"]


class ParabolicThermalProblem(_ThermalGeometry):
    type: Literal["parabolic_thermal"]
    dt: float = Field(0.01, gt=0.0)
    t_final: float = Field(0.5, gt=0.0)
    initial: Literal["zero", "reference_steady_state"] = "zero"

    @model_validator(mode="after")
    def _check_steps(self):
        steps = round(self.t_final / self.dt)
        if steps < 1 or abs(steps * self.dt - self.t_final) > STEP_TOLERANCE * self.t_final:
            raise ValueError(f"t_final={self.t_final} is not a multiple of dt={self.dt}")
        return self

    def initial_state(self, problem: TruthProblem) -> np.ndarray:
        if self.initial == "zero":
            return np.zeros(problem.size)
        return solve_truth(problem, problem.reference_parameter).coefficients


class ThermalContrast(_ThermalGeometry):
    """Thermal-block snapshot set measured alongside the advection demo."""
    count: int = Field(200, ge=1)
    n_max: int = Field(30, ge=1)
    seed: int = 0


class AdvectionDemoProblem(_Section):
    type: Literal["advection_demo"]
    grid_n: int = Field(256, ge=2)
    m_time_samples: int = Field(512, ge=2)
    n_max: int = Field(32, ge=1)
    parametric: bool = True
    contrast: Optional[ThermalContrast] = None

    @model_validator(mode="after")
    def _check_sizes(self):
        if self.grid_n < 2 * self.n_max:
            raise ValueError(f"grid_n={self.grid_n} must be at least 2 * n_max={2 * self.n_max}")
        if self.m_time_samples < self.grid_n:
            raise ValueError(f"m_time_samples={self.m_time_samples} must be at least grid_n={self.grid_n}")
        return self


Problem = Annotated[
    Union[ThermalBlockProblem, ParabolicThermalProblem, AdvectionDemoProblem],
    Field(discriminator="type"),
]


class GreedySection(_Section):
    training: Sampling = GridSampling()
    max_basis_size: int = Field(20, ge=1)
    target_error: float = Field(1e-6, gt=0.0)
    pod_modes_per_iter: int = Field(1, ge=1)
    seed_parameter: Optional[List[float]] = None
    mode: Literal["weak", "strong"] = "weak"


class OutputSection(_Section):
    directory: str = "runs/default"
    # CSV and JSON outputs always round-trip doubles.
    precision: Literal[17] = 17


class ValidationSection(_Section):
    test_set: Sampling = RandomSamplingConfig(count=100, seed=1)
    log_true_error: bool = False


class RunConfig(_Section):
    """Complete run description."""
    problem: Problem
    greedy: GreedySection = GreedySection()
    output: OutputSection = OutputSection()
    validation: ValidationSection = ValidationSection()

    @property
    def output_directory(self) -> Path:
        return Path(self.output.directory)

    def build_problem(self) -> TruthProblem:
        """Truth problem of thermal configurations."""
        if isinstance(self.problem, AdvectionDemoProblem):
            raise ValueError("advection_demo has no truth problem")
        return self.problem.build()

    def training_set(self, domain: ParameterDomain) -> list[Parameter]:
        return sample_training_set(domain, self.greedy.training.to_strategy())

    def test_set(self, domain: ParameterDomain) -> list[Parameter]:
        return sample_training_set(domain, self.validation.test_set.to_strategy())

    def greedy_config(self, problem: TruthProblem, threads: int = 1) -> GreedyConfig:
        domain = problem.domain
        seed = None
        if self.greedy.seed_parameter is not None:
            seed = domain.parameter(self.greedy.seed_parameter)
        return GreedyConfig(
            training_set=tuple(self.training_set(domain)),
            max_basis_size=self.greedy.max_basis_size,
            target_error=self.greedy.target_error,
            pod_modes_per_iter=self.greedy.pod_modes_per_iter,
            seed_parameter=seed,
            mode=GreedyMode(self.greedy.mode),
            validation_set=tuple(self.test_set(domain)) if self.validation.log_true_error else (),
            threads=threads,
        )


def load_run_config(path: str | Path) -> RunConfig:
    """
    Parse and validate a run configuration file.

    Raises:
        pydantic.ValidationError: On schema violations
        FileNotFoundError: If the file does not exist
    """
    text = Path(path).read_text(encoding="utf-8")
    config = RunConfig.model_validate_json(text)
    logger.debug(f"[config] loaded {path}: problem={config.problem.type}")
    return config
