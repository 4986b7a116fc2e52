"""
Offline basis construction: orthonormalization, POD, greedy and POD-Greedy.
"""

from .greedy import GreedyConfig, GreedyMode, run_greedy, weak_greedy_gamma
from .orthonormalize import orthonormalize_columns, orthonormalize_extend
from .pod import PODResult, pod
from .pod_greedy import run_pod_greedy, trajectory_error
from .sweep import ParameterSweep, SweepFailed
from .trace import GreedyIteration, GreedyTrace

__all__ = [
    "GreedyConfig",
    "GreedyMode",
    "run_greedy",
    "weak_greedy_gamma",
    "orthonormalize_columns",
    "orthonormalize_extend",
    "PODResult",
    "pod",
    "run_pod_greedy",
    "trajectory_error",
    "ParameterSweep",
    "SweepFailed",
    "GreedyIteration",
    "GreedyTrace",
]
