"""
Reduced models: projection, online solve, certification and persistence.
"""

from .model import ReducedBasis, ReducedModel, ResidualGram, continuity_constants, project
from .online import (
    Certificate,
    ReducedSolution,
    certify,
    coercivity_lower_bound,
    continuity_upper_bound,
    residual_dual_norm,
    solve_and_certify,
    solve_reduced,
)
from .parabolic import ReducedTrajectory, solve_reduced_parabolic
from .serialization import load_basis, load_model, save_basis, save_model

__all__ = [
    "ReducedBasis",
    "ReducedModel",
    "ResidualGram",
    "continuity_constants",
    "project",
    "Certificate",
    "ReducedSolution",
    "certify",
    "coercivity_lower_bound",
    "continuity_upper_bound",
    "residual_dual_norm",
    "solve_and_certify",
    "solve_reduced",
    "ReducedTrajectory",
    "solve_reduced_parabolic",
    "load_basis",
    "load_model",
    "save_basis",
    "save_model",
]
