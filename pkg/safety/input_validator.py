"""
Validation of user-supplied parameter values.

Checks:
- Empty or malformed component lists
- Non-finite values
- Dimension mismatch with the parameter domain
- Points outside the domain box
- Non-positive coefficients where the min-theta bound needs positivity
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from affine.coefficients import CoefficientFunction
from affine.parameters import Parameter, ParameterDomain
from errors import InputRejected


class ValidationSeverity(Enum):
    """Severity levels for validation issues."""
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"


@dataclass
class ValidationIssue:
    """A problem found in a parameter input."""
    severity: ValidationSeverity
    message: str
    check: str
    location: Optional[str] = None


@dataclass
class ValidationResult:
    """Result of parameter validation."""
    is_valid: bool
    parameter: Optional[Parameter]
    issues: List[ValidationIssue] = field(default_factory=list)

    def has_errors(self) -> bool:
        return any(
            issue.severity in (ValidationSeverity.ERROR, ValidationSeverity.CRITICAL)
            for issue in self.issues
        )

    def raise_for_issues(self) -> Parameter:
        """
        Return the parameter or raise on the first error.

        Raises:
            InputRejected: If validation failed
        """
        if self.is_valid and self.parameter is not None:
            return self.parameter
        errors = [i for i in self.issues if i.severity is not ValidationSeverity.INFO] or self.issues
        raise InputRejected(errors[0].message if errors else "invalid parameter", field="mu")


class ParameterValidator:
    """
    Validates parameter inputs against a domain before any solve.

    Accepts comma- or whitespace-separated component strings (as given on
    the command line) or numeric sequences.
    """

    SEPARATOR = re.compile(r"[,\s;]+")
    NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")

    def __init__(
        self,
        domain: ParameterDomain,
        coefficients: Sequence[CoefficientFunction] = (),
        boundary_fraction: float = 1e-6,
        strict_mode: bool = False,
    ):
        """
        Args:
            domain: Parameter box
            coefficients: Coefficient functions whose positivity flags are checked
            boundary_fraction: Relative distance to a face reported as INFO
            strict_mode: If True, treat warnings as errors
        """
        self.domain = domain
        self.coefficients = tuple(coefficients)
        self.boundary_fraction = boundary_fraction
        self.strict_mode = strict_mode

    def parse(self, text: str) -> tuple[Optional[List[float]], List[ValidationIssue]]:
        """Split a component string into floats, reporting malformed tokens."""
        tokens = [t for t in self.SEPARATOR.split(text.strip()) if t]
        if not tokens:
            return None, [ValidationIssue(ValidationSeverity.ERROR, "parameter string is empty", "empty_input")]
        issues = []
        for i, token in enumerate(tokens):
            if not self.NUMBER.match(token):
                issues.append(ValidationIssue(
                    ValidationSeverity.ERROR,
                    f"component {i} is not a number: {token[:30]!r}",
                    "malformed_number",
                    location=f"component {i}",
                ))
        if issues:
            return None, issues
        return [float(t) for t in tokens], []

    def validate(self, value: str | Sequence[float]) -> ValidationResult:
        """
        Validate a parameter given as a string or a sequence of numbers.

        Returns:
            ValidationResult with the parsed Parameter when valid
        """
        if isinstance(value, str):
            components, issues = self.parse(value)
            if components is None:
                return ValidationResult(False, None, issues)
        else:
            components, issues = [float(v) for v in value], []

        if not np.all(np.isfinite(components)):
            issues.append(ValidationIssue(ValidationSeverity.ERROR, "parameter has non-finite components", "non_finite"))
            return ValidationResult(False, None, issues)

        mu = Parameter(tuple(components))
        if mu.dimension != self.domain.dimension:
            issues.append(ValidationIssue(
                ValidationSeverity.ERROR,
                f"parameter has {mu.dimension} components, domain expects {self.domain.dimension}",
                "dimension_mismatch",
            ))
            return ValidationResult(False, None, issues)

        issues.extend(self._check_box(mu))
        issues.extend(self._check_coefficients(mu))

        is_valid = not any(
            issue.severity in (ValidationSeverity.ERROR, ValidationSeverity.CRITICAL) for issue in issues
        )
        if self.strict_mode:
            is_valid = is_valid and not any(issue.severity == ValidationSeverity.WARNING for issue in issues)
        return ValidationResult(is_valid, mu if is_valid else None, issues)

    def _check_box(self, mu: Parameter) -> List[ValidationIssue]:
        if not self.domain.contains(mu):
            return [ValidationIssue(
                ValidationSeverity.ERROR,
                f"parameter {mu} lies outside the domain box {self.domain.lower} - {self.domain.upper}",
                "outside_domain",
            )]
        issues = []
        for i, (v, lo, hi) in enumerate(zip(mu.values, self.domain.lower, self.domain.upper)):
            span = hi - lo
            if span > 0.0 and min(v - lo, hi - v) <= self.boundary_fraction * span:
                issues.append(ValidationIssue(
                    ValidationSeverity.INFO, f"component {i} lies on the domain boundary", "on_boundary",
                    location=f"component {i}",
                ))
        return issues

    def _check_coefficients(self, mu: Parameter) -> List[ValidationIssue]:
        issues = []
        for q, theta in enumerate(self.coefficients):
            if theta.required_dimension > mu.dimension:
                continue
            value = theta.evaluate(mu)
            if theta.positive and value <= 0.0:
                issues.append(ValidationIssue(
                    ValidationSeverity.CRITICAL,
                    f"theta_{q} = {value!r} is not positive; the coercivity bound is inapplicable",
                    "non_positive_coefficient",
                    location=f"term {q}",
                ))
            elif not theta.positive and value <= 0.0:
                issues.append(ValidationIssue(
                    ValidationSeverity.WARNING, f"theta_{q} = {value!r} is not positive", "sign_change",
                    location=f"term {q}",
                ))
        return issues
