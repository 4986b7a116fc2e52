"""
Truth discretizations: P1 thermal block, 1D Poisson, implicit Euler
stepping and exact advection snapshots.
"""

from .advection import advection_snapshots, l2_cell_metric
from .linalg import SPDFactor
from .problem import MeshInfo, TruthProblem
from .solvers import Trajectory, TruthSolution, solve_parabolic, solve_truth
from .thermal_block import build_poisson_1d, build_thermal_block

__all__ = [
    "MeshInfo",
    "SPDFactor",
    "Trajectory",
    "TruthProblem",
    "TruthSolution",
    "advection_snapshots",
    "build_poisson_1d",
    "build_thermal_block",
    "l2_cell_metric",
    "solve_parabolic",
    "solve_truth",
]
