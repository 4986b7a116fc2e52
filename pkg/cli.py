"""
Command-line interface for the reduced-basis toolkit.

Subcommands:
- offline: weak greedy training of a thermal-block model
- online: certified evaluation of a stored model at given parameters
- validate: audit of a stored model against truth solves
- nwidth-demo: N-width measurements of the advection manifold
- pod-greedy: POD-Greedy training of a parabolic model

Exit codes: 0 success, 1 input or configuration error, 2 numerical failure.
"""

import argparse
import json
import logging
import sys
import time
from typing import Callable, Optional, Sequence

from pydantic import ValidationError

from artifacts.store import RunDirectory, format_float, open_csv, write_json
from errors import GreedyAborted, InputRejected, NumericalFailure, RigorViolation
from nwidth.widths import advection_nwidth_demo, advection_parametric_demo, thermal_contrast
from offline.greedy import run_greedy
from offline.pod_greedy import run_pod_greedy
from offline.sweep import SweepFailed
from reduced.model import ReducedBasis, ReducedModel
from reduced.online import solve_and_certify
from reduced.serialization import basis_path_for, load_basis, load_model, save_basis, save_model
from run_config import (
    AdvectionDemoProblem,
    ParabolicThermalProblem,
    RunConfig,
    ThermalBlockProblem,
    load_run_config,
)
from safety.input_validator import ParameterValidator
from safety.output_validator import CertificateAuditor
from settings import LOG_LEVELS, configure_logging, get_default_threads

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2


def _run_directory(args: argparse.Namespace, config: Optional[RunConfig] = None) -> RunDirectory:
    if args.out:
        return RunDirectory(args.out)
    if config is not None:
        return RunDirectory(config.output_directory)
    raise InputRejected("no output directory; pass --out", field="out")


def _load_config(path: Optional[str]) -> RunConfig:
    if not path:
        raise InputRejected("this command needs --config", field="config")
    try:
        return load_run_config(path)
    except FileNotFoundError as e:
        raise InputRejected(f"config file not found: {path}", field="config") from e


def _write_training_artifacts(
    out: RunDirectory, basis: ReducedBasis, model: Optional[ReducedModel], trace
) -> None:
    save_basis(basis, out.path(RunDirectory.BASIS))
    if model is not None:
        save_model(model, out.path(RunDirectory.MODEL), basis_file=RunDirectory.BASIS)
    trace.to_csv(out.path(RunDirectory.TRACE))
    trace.error_table_to_csv(out.path(RunDirectory.ERROR_TABLE))


def _run_trainer(out: RunDirectory, trainer: Callable[[], tuple]) -> tuple:
    """Run a greedy trainer; an aborted run still leaves its partial artifacts."""
    try:
        return trainer()
    except GreedyAborted as e:
        _write_training_artifacts(out, e.basis, e.model, e.trace)
        logger.error(f"[cli] partial artifacts written to {out} (incomplete)")
        raise


def cmd_offline(args: argparse.Namespace) -> int:
    """Weak greedy training of a thermal-block model."""
    config = _load_config(args.config)
    if not isinstance(config.problem, ThermalBlockProblem):
        raise InputRejected(
            f"offline expects a thermal_block problem, got {config.problem.type}", field="problem.type"
        )
    problem = config.build_problem()
    greedy = config.greedy_config(problem, args.threads)

    out = _run_directory(args, config)
    basis, model, trace = _run_trainer(out, lambda: run_greedy(problem, greedy))
    if basis.size == 0:
        raise InputRejected(
            f"target_error={greedy.target_error:.3e} is met by the empty basis "
            f"(initial bound {trace.final_error:.3e}); an N = 0 model is unusable online",
            field="greedy.target_error",
        )
    _write_training_artifacts(out, basis, model, trace)
    print(f"N = {basis.size}, max certified training error = {trace.final_error:.6e} ({trace.stop_reason})")
    return EXIT_OK


def cmd_pod_greedy(args: argparse.Namespace) -> int:
    """POD-Greedy training of a parabolic thermal model."""
    config = _load_config(args.config)
    if not isinstance(config.problem, ParabolicThermalProblem):
        raise InputRejected(
            f"pod-greedy expects a parabolic_thermal problem, got {config.problem.type}", field="problem.type"
        )
    heat = config.problem
    problem = config.build_problem()
    initial = heat.initial_state(problem)
    greedy = config.greedy_config(problem, args.threads)

    out = _run_directory(args, config)
    basis, model, trace = _run_trainer(
        out, lambda: run_pod_greedy(problem, greedy, heat.dt, heat.t_final, initial)
    )
    _write_training_artifacts(out, basis, model, trace)
    if basis.size == 0:
        print(f"trivial dynamics: max surrogate {trace.final_error:.6e} with an empty basis")
    else:
        print(f"N = {basis.size}, max surrogate = {trace.final_error:.6e} ({trace.stop_reason})")
    return EXIT_OK


def cmd_online(args: argparse.Namespace) -> int:
    """Certified evaluation at every --mu; never touches the truth problem."""
    if not args.model:
        raise InputRejected("online needs --model", field="model")
    if not args.mu:
        raise InputRejected("online needs at least one --mu", field="mu")
    model = load_model(args.model)
    if not model.complete:
        logger.warning(f"[cli] model {args.model} comes from an aborted run")
    validator = ParameterValidator(model.domain, model.coefficients)
    parameters = [validator.validate(text).raise_for_issues() for text in args.mu]

    basis = None
    if args.lift:
        basis_file = basis_path_for(args.model)
        if basis_file is None:
            raise InputRejected("model has no basis file for --lift", field="lift")
        basis = load_basis(basis_file)

    records = []
    for i, mu in enumerate(parameters):
        start = time.perf_counter()
        solution, certificate = solve_and_certify(model, mu)
        elapsed = time.perf_counter() - start
        record = certificate.to_record()
        record["wall_time"] = elapsed
        records.append(record)
        print(json.dumps(record))
        if basis is not None:
            out = _run_directory(args)
            with open_csv(out.path(f"lifted_{i}.csv"), ["dof", "value"]) as writer:
                for dof, value in enumerate(basis.lift(solution.coordinates)):
                    writer.writerow([dof, format_float(value)])

    if args.out:
        write_json(RunDirectory(args.out).path(RunDirectory.CERTIFICATES), {"format_version": 1, "records": records})
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    """Rigor, effectivity and quasi-optimality audit over the configured test set."""
    if not args.model:
        raise InputRejected("validate needs --model", field="model")
    config = _load_config(args.config)
    if not isinstance(config.problem, ThermalBlockProblem):
        raise InputRejected(
            f"validate expects a thermal_block problem, got {config.problem.type}", field="problem.type"
        )
    model = load_model(args.model)
    problem = config.build_problem()
    if model.truth_size != problem.size:
        raise InputRejected(
            f"model was built for n_h={model.truth_size}, config gives n_h={problem.size}", field="model"
        )
    basis_file = basis_path_for(args.model)
    if basis_file is None:
        raise InputRejected("model has no basis file", field="model")
    basis = load_basis(basis_file)

    result = CertificateAuditor(problem, basis, model, args.threads).audit(config.test_set(problem.domain))
    out = _run_directory(args, config)
    result.to_csv(out.path(RunDirectory.VALIDATION))
    summary = result.summary()
    print(json.dumps(summary))
    result.raise_for_violations()
    return EXIT_OK


def cmd_nwidth_demo(args: argparse.Namespace) -> int:
    """Advection width curves against 1/2 N^{-1/2}, plus the optional thermal contrast."""
    config = _load_config(args.config)
    if not isinstance(config.problem, AdvectionDemoProblem):
        raise InputRejected(
            f"nwidth-demo expects an advection_demo problem, got {config.problem.type}", field="problem.type"
        )
    demo = config.problem
    out = _run_directory(args, config)

    reports = [(RunDirectory.WIDTHS, advection_nwidth_demo(demo.grid_n, demo.m_time_samples, demo.n_max))]
    if demo.parametric:
        reports.append((
            RunDirectory.WIDTHS_PARAMETRIC,
            advection_parametric_demo(demo.grid_n, demo.m_time_samples, demo.n_max),
        ))
    if demo.contrast is not None:
        contrast = demo.contrast
        reports.append((
            RunDirectory.WIDTHS_CONTRAST,
            thermal_contrast(contrast.build(), contrast.count, contrast.n_max, contrast.seed, args.threads),
        ))

    violations = []
    for name, report in reports:
        report.to_csv(out.path(name))
        violations.extend(report.lower_bound_violations())
        slope = report.slope() if report.analytic_lower is not None else float("nan")
        print(f"{report.label}: pod_upper[{report.n_values[-1]}] = {report.pod_upper[-1]:.6e}, slope {slope:.3f}")

    if violations:
        raise RigorViolation(len(violations), max(r.lower_bound_gap() for _, r in reports))
    return EXIT_OK


COMMANDS = {
    "offline": cmd_offline,
    "online": cmd_online,
    "validate": cmd_validate,
    "nwidth-demo": cmd_nwidth_demo,
    "pod-greedy": cmd_pod_greedy,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbcert",
        description="Certified reduced-basis model order reduction.",
        epilog="Exit codes: 0 success, 1 input or configuration error, 2 numerical failure.",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR or CRITICAL; overrides RB_LOG_LEVEL")
    parser.add_argument("--log-format", choices=["console", "json"], default=None, help="Overrides RB_LOG_FORMAT")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in COMMANDS:
        sub = subparsers.add_parser(name, help=COMMANDS[name].__doc__)
        sub.add_argument("--config", help="Run configuration (JSON)")
        sub.add_argument("--model", help="Reduced model file (model.json)")
        sub.add_argument("--mu", action="append", default=[], help="Parameter v1,v2,... (repeatable)")
        sub.add_argument("--lift", action="store_true", help="Write lifted states V u_N as CSV")
        sub.add_argument("--threads", type=int, default=None, help="Sweep workers (default RB_THREADS)")
        sub.add_argument("--out", help="Output directory (overrides output.directory)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one command and map failures to exit codes.

    Returns:
        Process exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level is not None and args.log_level.upper() not in LOG_LEVELS:
        print(f"error: --log-level must be one of {', '.join(LOG_LEVELS)}, got {args.log_level!r}", file=sys.stderr)
        return EXIT_INPUT
    configure_logging(args.log_level, args.log_format)
    if args.threads is None:
        args.threads = get_default_threads()
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INPUT

    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        print(f"error: invalid configuration\n{e}", file=sys.stderr)
        return EXIT_INPUT
    except InputRejected as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SweepFailed as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT if isinstance(e.cause, InputRejected) else EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
