"""
Safety layers around the reduced model.

Provides:
- Parameter input validation with severities
- Certificate audits against truth solves
"""

from .input_validator import ParameterValidator, ValidationIssue, ValidationResult, ValidationSeverity
from .output_validator import AuditIssue, AuditRecord, AuditResult, AuditSeverity, CertificateAuditor

__all__ = [
    "ParameterValidator",
    "ValidationIssue",
    "ValidationResult",
    "ValidationSeverity",
    "AuditIssue",
    "AuditRecord",
    "AuditResult",
    "AuditSeverity",
    "CertificateAuditor",
]
