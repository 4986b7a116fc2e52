"""
Parameter domains, coefficient functions and affine operators.

Provides:
- Box-shaped parameter domains with training-set sampling
- A closed enumeration of coefficient functions theta_q
- Affinely decomposed sparse symmetric operators
"""

from .coefficients import CoefficientFunction, CoefficientKind
from .operator import AffineOperator
from .parameters import (
    Parameter,
    ParameterDomain,
    RandomSampling,
    SamplingStrategy,
    UniformGrid,
    sample_training_set,
)

__all__ = [
    "AffineOperator",
    "CoefficientFunction",
    "CoefficientKind",
    "Parameter",
    "ParameterDomain",
    "RandomSampling",
    "SamplingStrategy",
    "UniformGrid",
    "sample_training_set",
]
