"""Command-line front end: ``cavity-thermo {steady,sweep,audit,evolve}``.

Exit codes: 0 ok, 1 failed check or invariant, 2 convergence or integrator
failure, 3 insufficient truncation, 64 usage or configuration error.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, NoReturn, Optional, Sequence, TextIO

from . import __version__
from .audit import AuditReport, CheckStatus, audit_model, fuzz
from .config import EvolveConfig, RunConfig, SweepConfig, load_config
from .errors import CavityThermoError, ConfigError
from .io import write_csv
from .models import PRESETS, preset, with_parameter
from .parser import parse_value
from .serializer import stringify_config
from .solver import SolverOptions, SteadyStateMethod
from .streaming import csv_row_writer
from .sweep import TableResult, run_sweep, run_trajectory, solve_point

logger = logging.getLogger("cavity_thermo")

EXIT_OK = 0
EXIT_FAILED = 1


class _ArgumentParser(argparse.ArgumentParser):
    """Parser whose usage errors become ConfigError (exit 64)."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="cavity-thermo",
        description="Steady-state and transient thermodynamics of driven open cavities.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    source = common.add_argument_group("model")
    source.add_argument("--preset", choices=PRESETS, help="start from a reference model")
    source.add_argument("--config", metavar="PATH", help="INI configuration file")
    source.add_argument("--n-max", type=int, metavar="INT", help="Fock space cutoff")
    source.add_argument("--delta", type=float, help="cavity detuning from the drive")
    source.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="PATH=VALUE",
        help="override a model parameter, e.g. channels.cavity.occupation=0.5 (repeatable)",
    )
    solver = common.add_argument_group("solver")
    solver.add_argument("--tol", type=float, metavar="FLOAT", help="relative residual bound")
    solver.add_argument("--method", choices=[m.value for m in SteadyStateMethod])
    run = common.add_argument_group("run")
    run.add_argument("--out", metavar="PATH", help="CSV output file")
    run.add_argument("--no-audit", action="store_true", help="skip the invariant checks")
    run.add_argument("--workers", type=int, default=1, help="worker threads for sweeps and fuzzing")
    run.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    run.add_argument("-q", "--quiet", action="store_true", help="errors only")

    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    steady = commands.add_parser(
        "steady", parents=[common], help="solve and report one steady state"
    )
    steady.set_defaults(handler=cmd_steady)

    sweep = commands.add_parser("sweep", parents=[common], help="sweep one parameter to CSV")
    sweep.add_argument("--param", help="dot path of the swept parameter, e.g. drive.delta")
    sweep.add_argument("--values", help="comma separated values")
    sweep.add_argument("--start", type=float)
    sweep.add_argument("--stop", type=float)
    sweep.add_argument("--count", type=int)
    sweep.add_argument("--series", help="outer parameter, one block of rows per value")
    sweep.add_argument("--series-values", help="comma separated values of the series parameter")
    sweep.add_argument("--outputs", help="comma separated report columns")
    sweep.set_defaults(handler=cmd_sweep)

    audit = commands.add_parser("audit", parents=[common], help="check every identity")
    audit.add_argument("--fuzz", type=int, metavar="N", help="audit N random models instead")
    audit.add_argument("--seed", type=int, default=0, metavar="N")
    audit.set_defaults(handler=cmd_audit)

    evolve = commands.add_parser("evolve", parents=[common], help="transient trajectory to CSV")
    evolve.add_argument("--initial", choices=["vacuum", "thermal", "coherent", "file"])
    evolve.add_argument("--alpha", help="coherent amplitude, e.g. 1+0.5j")
    evolve.add_argument("--state-file", metavar="PATH", help=".npy density matrix")
    evolve.add_argument("--t-end", type=float)
    evolve.add_argument("--samples", type=int)
    evolve.add_argument("--max-step", type=float)
    evolve.set_defaults(handler=cmd_evolve)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _number_list(text: str, name: str) -> List[float]:
    values = parse_value(text)
    items = values if isinstance(values, list) else [values]
    try:
        return [float(v) for v in items]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"--{name} needs numbers, got '{text}'", field=name) from e


def _complex_arg(text: str, name: str) -> complex:
    try:
        return complex(parse_value(text))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"--{name} needs a complex number, got '{text}'", field=name) from e


def _overrides(items: Sequence[str]) -> Dict[str, Any]:
    result: Dict[str, Any] = {}
    for item in items:
        path, sep, raw = item.partition("=")
        if not sep or not path.strip():
            raise ConfigError(f"--set expects PATH=VALUE, got '{item}'", field="set")
        result[path.strip()] = parse_value(raw)
    return result


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Combine configuration file, preset and flags (flags win).

    Raises:
        ConfigError: On conflicting or malformed options
    """
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both", field="preset")
    if args.config:
        config = load_config(args.config)
    else:
        config = RunConfig(model=preset(args.preset or "empty"))

    model = config.model
    if args.n_max is not None:
        model = with_parameter(model, "n_max", args.n_max)
    if args.delta is not None:
        model = with_parameter(model, "drive.delta", args.delta)
    for path, value in _overrides(args.set).items():
        model = with_parameter(model, path, value)
    config.model = model

    if args.tol is not None or args.method is not None:
        base = config.solver
        config.solver = SolverOptions(
            method=args.method or base.method.value,
            tol=base.tol if args.tol is None else args.tol,
            dense_limit=base.dense_limit,
            max_dim=base.max_dim,
            max_steps=base.max_steps,
        )
    return config


def _print_audit(report: AuditReport, stream: TextIO, verbose: bool = True) -> None:
    counts = {status: 0 for status in CheckStatus}
    for check in report.checks:
        counts[check.status] += 1
    label = "" if report.case is None else f"case {report.case}: "
    stream.write(
        f"{label}audit {'passed' if report.passed else 'FAILED'}: "
        f"{counts[CheckStatus.PASS]} passed, {counts[CheckStatus.FAIL]} failed, "
        f"{counts[CheckStatus.SKIPPED]} skipped ({report.model_fingerprint[:12]})\n"
    )
    shown = report.checks if verbose else report.failures
    for check in shown:
        stream.write(
            f"  {check.status.value:<7} {check.name:<34} residual {check.residual:.3e} "
            f"tol {check.tolerance:.3e}  {check.anchor}\n"
        )
        if check.status == CheckStatus.FAIL and check.detail:
            stream.write(f"          {check.detail}\n")
    for note in report.notes:
        stream.write(f"  note: {note}\n")


def _write_table(table: TableResult, out: Optional[str]) -> None:
    if out:
        write_csv(table.rows, out, table.columns)
        logger.info("wrote %d rows to %s", len(table.rows), out)
        return
    with csv_row_writer(sys.stdout, table.columns) as writer:
        writer.write_items(table.rows)


def cmd_steady(args: argparse.Namespace) -> int:
    """Solve one steady state, print its report and (by default) audit it."""
    config = resolve_config(args)
    model = config.model
    liouvillian, rho, report = solve_point(model, config.solver, check=not args.no_audit)

    row = report.as_row()
    sections: Dict[str, Dict[str, Any]] = {"report": row}
    sections["temperatures"] = dict(report.temperatures)
    sections["channel_powers"] = dict(report.P_channels)
    sections["channel_io_powers"] = dict(report.P_io_channels)
    sys.stdout.write(stringify_config(sections))

    if args.out:
        write_csv([row], args.out)

    if args.no_audit:
        return EXIT_OK
    audit = audit_model(model, options=config.solver, solved=(liouvillian, rho))
    sys.stdout.write("\n")
    _print_audit(audit, sys.stdout, verbose=bool(args.verbose))
    return EXIT_OK if audit.passed else EXIT_FAILED


def _sweep_config(args: argparse.Namespace, config: RunConfig) -> SweepConfig:
    base = config.sweep
    parameter = args.param or (base.parameter if base else None)
    if parameter is None:
        raise ConfigError("sweep needs --param or a [sweep] section", field="param")

    if args.values is not None:
        values = _number_list(args.values, "values")
    elif args.start is not None or args.stop is not None or args.count is not None:
        if args.start is None or args.stop is None or args.count is None:
            raise ConfigError("--start, --stop and --count go together", field="count")
        if args.count < 1:
            raise ConfigError("--count must be at least 1", field="count")
        values = SweepConfig.linear(parameter, args.start, args.stop, args.count).values
    elif base is not None:
        values = base.values
    else:
        raise ConfigError("sweep needs --values or --start/--stop/--count", field="values")

    series = args.series or (base.series if base else None)
    if args.series_values is not None:
        series_values = _number_list(args.series_values, "series-values")
    else:
        series_values = base.series_values if base else []
    outputs = [s.strip() for s in args.outputs.split(",")] if args.outputs else None
    if outputs is None and base is not None:
        outputs = base.outputs
    output = args.out or (base.output if base else None)
    return SweepConfig(parameter, values, series, series_values, outputs, output)


def cmd_sweep(args: argparse.Namespace) -> int:
    """Sweep a parameter; failed points become NaN rows and exit 1."""
    config = resolve_config(args)
    sweep = _sweep_config(args, config)
    table = run_sweep(config.model, sweep, config.solver, args.workers, audit=not args.no_audit)
    _write_table(table, sweep.output)
    if not table.ok:
        sys.stderr.write(f"{len(table.failed)} of {len(table.rows)} sweep points failed\n")
        return EXIT_FAILED
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    """Audit one model, or ``--fuzz N`` random ones."""
    config = resolve_config(args)
    if args.fuzz is not None:
        if args.fuzz < 1:
            raise ConfigError("--fuzz must be at least 1", field="fuzz")
        reports = fuzz(args.seed, args.fuzz, options=config.solver, workers=args.workers)
    else:
        reports = [audit_model(config.model, options=config.solver, seed=args.seed)]

    for report in reports:
        _print_audit(report, sys.stdout, verbose=args.fuzz is None or bool(args.verbose))
    failed = sum(not r.passed for r in reports)
    if args.fuzz is not None:
        passed = len(reports) - failed
        sys.stdout.write(f"{passed} of {len(reports)} models passed (seed {args.seed})\n")

    if args.out:
        rows = [
            {
                "case": -1 if r.case is None else r.case,
                "check": c.name,
                "status": c.status.value,
                "residual": c.residual,
                "tolerance": c.tolerance,
            }
            for r in reports
            for c in r.checks
        ]
        write_csv(rows, args.out, ["case", "check", "status", "residual", "tolerance"])
    return EXIT_OK if failed == 0 else EXIT_FAILED


def cmd_evolve(args: argparse.Namespace) -> int:
    """Integrate from an initial state and write the time series."""
    config = resolve_config(args)
    base = config.evolve or EvolveConfig()
    evolve = EvolveConfig(
        initial=args.initial or base.initial,
        alpha=_complex_arg(args.alpha, "alpha") if args.alpha is not None else base.alpha,
        state_file=args.state_file or base.state_file,
        t_end=base.t_end if args.t_end is None else args.t_end,
        samples=base.samples if args.samples is None else args.samples,
        max_step=base.max_step if args.max_step is None else args.max_step,
    )
    table = run_trajectory(config.model, evolve, config.solver)
    _write_table(table, args.out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CavityThermoError as e:
        sys.stderr.write(f"error: {e}\n")
        return e.exit_code

    _configure_logging(args)
    try:
        return int(args.handler(args))
    except CavityThermoError as e:
        logger.debug("command failed", exc_info=True)
        sys.stderr.write(f"error: {type(e).__name__}: {e}\n")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
