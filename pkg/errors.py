"""
Exception hierarchy for the reduced-basis toolkit.

Two families:
- InputRejected: a precondition on user or caller input failed (CLI exit code 1)
- NumericalFailure: a numerical guarantee could not be established (CLI exit code 2)
"""

from typing import Any, Optional


class ReducedBasisError(Exception):
    """Base class for all toolkit errors."""


class InputRejected(ReducedBasisError, ValueError):
    """Raised when an input violates a documented precondition."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class NumericalFailure(ReducedBasisError, RuntimeError):
    """Base class for failures of numerical guarantees."""


class CoercivityLoss(NumericalFailure):
    """Truth operator failed to factorize as symmetric positive definite."""

    def __init__(self, parameter: Any, detail: str = ""):
        self.parameter = parameter
        message = f"loss of coercivity at mu={parameter}"
        super().__init__(f"{message} ({detail})" if detail else message)


class ReducedCoercivityLoss(NumericalFailure):
    """Reduced system matrix is not symmetric positive definite."""

    def __init__(self, parameter: Any, basis_size: int):
        self.parameter = parameter
        self.basis_size = basis_size
        super().__init__(
            f"reduced matrix of size {basis_size} lost positive definiteness at mu={parameter}"
        )


class MinThetaInapplicable(NumericalFailure):
    """Min-theta coercivity bound cannot be applied at the given parameter."""

    def __init__(self, parameter: Any, term: int, value: float):
        self.parameter = parameter
        self.term = term
        self.value = value
        super().__init__(
            f"min-theta bound inapplicable at mu={parameter}: theta_{term} = {value!r} is not positive"
        )


class LinearDependence(NumericalFailure):
    """Basis extension vector lies (numerically) in the current span."""

    def __init__(self, defect_norm: float, vector_norm: float):
        self.defect_norm = defect_norm
        self.vector_norm = vector_norm
        super().__init__(
            f"extension rejected: defect norm {defect_norm:.3e} vs vector norm {vector_norm:.3e}"
        )


class RigorViolation(NumericalFailure):
    """A certified bound was found below the true error."""

    def __init__(self, violations: int, worst_gap: float):
        self.violations = violations
        self.worst_gap = worst_gap
        super().__init__(
            f"{violations} rigor violation(s); worst gap {worst_gap:.3e}"
        )


class GreedyAborted(NumericalFailure):
    """Greedy loop stopped on an error; carries the partial state."""

    def __init__(self, cause: Exception, trace: Any, basis: Any, model: Any = None):
        self.cause = cause
        self.trace = trace
        self.basis = basis
        self.model = model
        super().__init__(f"greedy aborted: {cause}")
