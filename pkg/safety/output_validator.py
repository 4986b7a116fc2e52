"""
Audit of certified reduced solutions against truth solves.

Checks per parameter:
- Rigor: error bound covers the true X-norm error
- Output rigor: output bounds cover the true output errors
- Effectivity: bound <= (continuity UB / coercivity LB) * true error
- Quasi-optimality: true error <= (continuity UB / coercivity LB) * best approximation
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from affine.parameters import Parameter
from artifacts.store import format_float, open_csv
from errors import RigorViolation
from offline.sweep import ParameterSweep
from reduced.model import ReducedBasis, ReducedModel
from reduced.online import continuity_upper_bound, solve_and_certify
from truth.linalg import x_norm
from truth.problem import TruthProblem
from truth.solvers import solve_truth

logger = logging.getLogger(__name__)

RIGOR_SLACK = 1e-9
EFFECTIVITY_SLACK = 1e-8


class AuditSeverity(Enum):
    """Severity levels for audit findings."""
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"


@dataclass
class AuditIssue:
    """A failed check at one parameter."""
    severity: AuditSeverity
    message: str
    category: str
    parameter: Optional[Parameter] = None
    gap: float = 0.0


@dataclass(frozen=True)
class AuditRecord:
    """Truth comparison at one parameter."""
    parameter: Parameter
    true_error: float
    error_bound: float
    coercivity_lb: float
    continuity_ub: float
    best_approximation: float
    output_errors: np.ndarray
    output_bounds: np.ndarray

    @property
    def effectivity(self) -> float:
        """error_bound / true_error (inf for a zero true error)."""
        return self.error_bound / self.true_error if self.true_error > 0.0 else float("inf")

    @property
    def effectivity_limit(self) -> float:
        return self.continuity_ub / self.coercivity_lb


@dataclass
class AuditResult:
    """Result of a certificate audit."""
    records: List[AuditRecord]
    issues: List[AuditIssue] = field(default_factory=list)

    @property
    def is_rigorous(self) -> bool:
        return not any(issue.severity == AuditSeverity.CRITICAL for issue in self.issues)

    def has_critical_issues(self) -> bool:
        return not self.is_rigorous

    def raise_for_violations(self) -> None:
        """
        Raises:
            RigorViolation: If any bound failed to cover the true error
        """
        critical = [i for i in self.issues if i.severity == AuditSeverity.CRITICAL]
        if critical:
            raise RigorViolation(len(critical), max(i.gap for i in critical))

    def summary(self) -> Dict[str, float]:
        """Effectivity statistics (finite values only) and the rigor violation count."""
        finite = [r.effectivity for r in self.records if np.isfinite(r.effectivity)]
        stats = (np.min(finite), np.median(finite), np.max(finite)) if finite else (np.nan,) * 3
        return {
            "effectivity_min": float(stats[0]),
            "effectivity_median": float(stats[1]),
            "effectivity_max": float(stats[2]),
            "max_true_error": max((r.true_error for r in self.records), default=0.0),
            "max_error_bound": max((r.error_bound for r in self.records), default=0.0),
            "max_effectivity_limit": max((r.effectivity_limit for r in self.records), default=0.0),
            "rigor_violations": sum(1 for i in self.issues if i.severity == AuditSeverity.CRITICAL),
        }

    def to_csv(self, path: str | Path) -> Path:
        """
        One "point" row per parameter, then one "summary" row carrying the
        effectivity statistics and the rigor violation count.
        """
        if not self.records:
            dim, outputs = 0, 0
        else:
            dim, outputs = self.records[0].parameter.dimension, self.records[0].output_errors.size
        header = [
            "kind", *[f"mu_{i}" for i in range(dim)], "true_error", "error_bound", "effectivity",
            "effectivity_limit", "best_approximation",
            *[f"output_error_{i}" for i in range(outputs)], *[f"output_bound_{i}" for i in range(outputs)],
            "effectivity_min", "effectivity_median", "effectivity_max", "rigor_violations",
        ]
        with open_csv(path, header) as writer:
            for r in self.records:
                writer.writerow([
                    "point", *[format_float(v) for v in r.parameter.values],
                    format_float(r.true_error), format_float(r.error_bound), format_float(r.effectivity),
                    format_float(r.effectivity_limit), format_float(r.best_approximation),
                    *[format_float(v) for v in r.output_errors], *[format_float(v) for v in r.output_bounds],
                    "", "", "", "",
                ])
            s = self.summary()
            writer.writerow([
                "summary", *[""] * dim,
                format_float(s["max_true_error"]), format_float(s["max_error_bound"]), "",
                format_float(s["max_effectivity_limit"]), "", *[""] * (2 * outputs),
                format_float(s["effectivity_min"]), format_float(s["effectivity_median"]),
                format_float(s["effectivity_max"]), s["rigor_violations"],
            ])
        return Path(path)


class CertificateAuditor:
    """
    Compares certificates with truth solutions.

    Rigor failures are CRITICAL; effectivity and quasi-optimality failures
    are ERRORs since they indicate inconsistent offline constants.
    """

    def __init__(self, problem: TruthProblem, basis: ReducedBasis, model: ReducedModel, threads: int = 1):
        """
        Args:
            problem: Truth problem the model was built from
            basis: Basis of the model
            model: Reduced model
            threads: Sweep workers
        """
        self.problem = problem
        self.basis = basis
        self.model = model
        self.sweep = ParameterSweep(threads)

    def record(self, mu: Parameter) -> AuditRecord:
        x = self.problem.inner_product
        truth = solve_truth(self.problem, mu).coefficients
        solution, certificate = solve_and_certify(self.model, mu)
        best = truth - self.basis.lift(self.basis.project(x, truth))
        return AuditRecord(
            parameter=mu,
            true_error=x_norm(x, truth - self.basis.lift(solution.coordinates)),
            error_bound=certificate.error_bound,
            coercivity_lb=certificate.coercivity_lb,
            continuity_ub=continuity_upper_bound(self.model, mu),
            best_approximation=x_norm(x, best),
            output_errors=np.abs(self.problem.outputs @ truth - solution.outputs),
            output_bounds=certificate.output_bound,
        )

    def audit(self, parameters: Sequence[Parameter]) -> AuditResult:
        """Audit every parameter and collect issues."""
        records = self.sweep.map(self.record, parameters)
        issues: List[AuditIssue] = []
        for r in records:
            issues.extend(self._check(r))
        result = AuditResult(records, issues)
        worst = max((r.effectivity for r in records if np.isfinite(r.effectivity)), default=float("nan"))
        logger.info(
            f"[audit] {len(records)} parameters, {len(issues)} issue(s), max effectivity {worst:.3g}"
        )
        return result

    def _check(self, r: AuditRecord) -> List[AuditIssue]:
        issues = []
        if r.error_bound + RIGOR_SLACK < r.true_error:
            gap = r.true_error - r.error_bound
            issues.append(AuditIssue(
                AuditSeverity.CRITICAL, f"error bound {r.error_bound:.3e} below true error {r.true_error:.3e}",
                "rigor", r.parameter, gap,
            ))
        for i, (err, bound) in enumerate(zip(r.output_errors, r.output_bounds)):
            if bound + RIGOR_SLACK < err:
                issues.append(AuditIssue(
                    AuditSeverity.CRITICAL, f"output {i} bound {bound:.3e} below true error {err:.3e}",
                    "output_rigor", r.parameter, float(err - bound),
                ))
        if r.error_bound > r.effectivity_limit * r.true_error + EFFECTIVITY_SLACK:
            issues.append(AuditIssue(
                AuditSeverity.ERROR,
                f"effectivity {r.effectivity:.3g} exceeds computable limit {r.effectivity_limit:.3g}",
                "effectivity", r.parameter, r.error_bound - r.effectivity_limit * r.true_error,
            ))
        if r.true_error > r.effectivity_limit * r.best_approximation + EFFECTIVITY_SLACK:
            issues.append(AuditIssue(
                AuditSeverity.ERROR, "true error exceeds the quasi-optimality bound",
                "quasi_optimality", r.parameter, r.true_error - r.effectivity_limit * r.best_approximation,
            ))
        for issue in issues:
            logger.warning(f"[audit] mu={r.parameter}: {issue.message}")
        return issues
