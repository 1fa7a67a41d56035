import argparse
import dataclasses
import json
import sys
import textwrap
from pathlib import Path

from rich.console import Console
from rich.table import Table

from imitab import __appname__, __version__
from imitab.analytics import bound_records
from imitab.analytics.bounds import CAPPED_BOUNDS, bound_bc_expected, bound_mimic_emp, bound_mimic_md_expected
from imitab.exceptions import ConfigError, InvalidParameter
from imitab.harness import (
    SUITES,
    fit_rate,
    fit_to_dict,
    format_csv,
    load_experiment_config,
    parse_experiment_config,
    read_csv,
    run_experiment,
    verify,
    write_csv,
)
from imitab.instances import get_family_class
from imitab.mdp import validate_mdp, value
from imitab.models import AppConfig, BoundRecord, ExperimentConfig, ExperimentResult, ExpertKind, RateFit, VerifyReport
from imitab.utils.app_resources import list_experiment_presets, read_experiment_preset
from imitab.utils.jsonio import save_instance

FAMILY_CHOICES = ("no_interaction", "known_transition", "random")
ALGORITHM_CHOICES = ("bc", "mimic_emp", "mimic_md", "active_bc")

# the bound each algorithm's mean suboptimality is compared against in run summaries
ALGORITHM_BOUNDS = {
    "bc": bound_bc_expected,
    "active_bc": bound_bc_expected,
    "mimic_emp": bound_mimic_emp,
    "mimic_md": bound_mimic_md_expected,
}


def format_number(x: float | None) -> str:
    return "-" if x is None else f"{x:.6g}"


def print_bounds(records: list[BoundRecord]) -> None:
    table = Table(title="Suboptimality Bounds")
    table.add_column("Bound", style="magenta", no_wrap=True)
    table.add_column("Inputs", style="cyan", no_wrap=False)
    table.add_column("Value", style="green", no_wrap=True, justify="right")
    for record in records:
        inputs = ", ".join(f"{k}={v}" for k, v in record.inputs.items())
        table.add_row(record.name, inputs, format_number(record.value))
    Console().print(table)


def print_rate_fit(fit: RateFit) -> None:
    table = Table(
        title=f"log-log fit over {fit.x_axis}: slope {fit.slope:.4f} [{fit.ci_low:.4f}, {fit.ci_high:.4f}]",
        caption=f"intercept {fit.intercept:.4f}",
    )
    table.add_column(fit.x_axis, style="cyan", justify="right")
    table.add_column("Mean", style="green", justify="right")
    table.add_column("Std Err", style="blue", justify="right")
    table.add_column("Rows", style="white", justify="right")
    table.add_column("Used", style="magenta", justify="center")
    for p in fit.points:
        used = "no" if p.excluded else "yes"
        table.add_row(str(p.x), format_number(p.mean), format_number(p.stderr), str(p.count), used)
    Console().print(table)


def print_verify_reports(reports: tuple[VerifyReport, ...]) -> None:
    for report in reports:
        table = Table(title=f"verify {report.suite}: {'PASS' if report.passed else 'FAIL'}")
        table.add_column("Check", style="magenta", no_wrap=False)
        table.add_column("Measured", style="cyan", justify="right")
        table.add_column("Threshold", style="cyan", justify="right")
        table.add_column("Result", justify="center")
        table.add_column("Detail", style="white", no_wrap=False)
        for check in report.checks:
            result = "[green]pass[/green]" if check.passed else "[bold red]FAIL[/bold red]"
            measured, threshold = format_number(check.measured), format_number(check.threshold)
            table.add_row(check.name, measured, threshold, result, check.detail)
        Console().print(table)


def print_run_summary(config: ExperimentConfig, results: list[ExperimentResult], output: Path) -> None:
    bound = ALGORITHM_BOUNDS[config.algorithm]
    table = Table(title=f"{config.algorithm} on {config.family}", caption=f"rows written to {output}")
    table.add_column(config.sweep_axis, style="cyan", justify="right")
    table.add_column("Rows", style="white", justify="right")
    table.add_column("Mean Subopt.", style="green", justify="right")
    table.add_column("Bound", style="blue", justify="right")
    table.add_column("Failed", style="red", justify="right")
    for x in config.grid:
        rows = [r for r in results if r.axis_value(config.sweep_axis) == x]
        ok = [r.suboptimality for r in rows if r.status == "ok"]
        S, _, H, N = config.point(x)
        try:
            reference = format_number(bound(S, H, N))
        except InvalidParameter:
            reference = "-"
        mean = format_number(sum(ok) / len(ok)) if ok else "-"  # type: ignore
        table.add_row(str(x), str(len(rows)), mean, reference, str(len(rows) - len(ok)))
    Console().print(table)


def parse_cli_args(argv: list[str] | None = None) -> argparse.Namespace:
    prog = __appname__
    args_parser = argparse.ArgumentParser(
        prog=prog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Tabular imitation learning laboratory",
        epilog=textwrap.dedent(
            f"""\
        examples:
          {prog} gen-instance --family no_interaction -S 6 -A 4 -H 10 -N 20 --seed 3
          {prog} run --preset bc_rate_n -o bc.csv      run a packaged sweep
          {prog} fit bc.csv --x-axis N                 fit the log-log rate
          {prog} bounds -S 4 -H 5 -N 10 --delta 0.1    evaluate every bound
          {prog} verify all                            run every verification suite
        """
        ),
    )
    args_parser.add_argument(
        "-v",
        "--version",
        action="version",
        version=f"v{__version__}",
        help="print version and exit",
    )
    args_parser.add_argument("--config", type=Path, help="INI file used instead of the user config")
    args_parser.add_argument("--log-level", help="override [General] LogLevel")
    commands = args_parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-instance", help="generate an instance with its expert and manifest")
    gen.add_argument("--family", choices=FAMILY_CHOICES, required=True)
    gen.add_argument("-S", type=int, required=True, dest="num_states")
    gen.add_argument("-A", type=int, required=True, dest="num_actions")
    gen.add_argument("-H", type=int, required=True, dest="horizon")
    gen.add_argument("-N", type=int, default=1, dest="num_trajectories", help="dataset size the instance targets")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--expert", choices=("deterministic", "stochastic"), default="deterministic")
    gen.add_argument("--concentration", type=float, default=1.0)
    gen.add_argument("-o", "--output", type=Path, help="MDP JSON path (sidecars are written next to it)")

    run = commands.add_parser("run", help="run an experiment sweep and write CSV rows")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("experiment", nargs="?", type=Path, help="experiment JSON document")
    source.add_argument("--preset", choices=list_experiment_presets(), help="packaged experiment")
    run.add_argument("--family", choices=FAMILY_CHOICES)
    run.add_argument("--algorithm", choices=ALGORITHM_CHOICES)
    run.add_argument("--axis", choices=("N", "H", "S"), dest="sweep_axis")
    run.add_argument("--grid", help="comma separated, strictly increasing")
    run.add_argument("-S", type=int)
    run.add_argument("-A", type=int)
    run.add_argument("-H", type=int)
    run.add_argument("-N", type=int)
    run.add_argument("--replicates", type=int)
    run.add_argument("--seed", type=int, dest="base_seed")
    run.add_argument("--workers", type=int)
    run.add_argument("--solver", choices=("exact", "subgradient"))
    run.add_argument("--timing", action="store_true", default=None, help="record wall_ms per row")
    run.add_argument("-o", "--output", help="CSV path, '-' for stdout")

    fit = commands.add_parser("fit", help="fit log(mean suboptimality) against log(x)")
    fit.add_argument("csv", type=Path)
    fit.add_argument("--x-axis", choices=("N", "H", "S"), required=True)
    fit.add_argument("--algo", choices=ALGORITHM_CHOICES)
    fit.add_argument("--family", choices=FAMILY_CHOICES)
    fit.add_argument("--bound", choices=sorted(CAPPED_BOUNDS), help="exclude grid points where it is capped at H")
    fit.add_argument("--resamples", type=int)
    fit.add_argument("--json", action="store_true", help="print the fit as JSON")

    bounds = commands.add_parser("bounds", help="evaluate the closed-form bounds")
    bounds.add_argument("-S", type=int, required=True)
    bounds.add_argument("-H", type=int, required=True)
    bounds.add_argument("-N", type=int, required=True)
    bounds.add_argument("--delta", type=float)
    bounds.add_argument("--json", action="store_true", help="print {name, inputs, value} records")

    check = commands.add_parser("verify", help="run verification suites; exit status 1 on any failure")
    check.add_argument("suite", choices=[*SUITES, "all"])
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--json", action="store_true")

    return args_parser.parse_args(argv)


def gen_instance(args: argparse.Namespace, app_config: AppConfig) -> int:
    family = get_family_class(args.family)(
        args.num_states,
        args.num_actions,
        args.horizon,
        args.num_trajectories,
        expert_kind=ExpertKind(args.expert, args.concentration),
    )
    bundle = family.build(args.seed)
    output = args.output or app_config.output_dir / f"{args.family}-seed{args.seed}.json"
    paths = save_instance(bundle, output)
    violations = validate_mdp(bundle.mdp, app_config.probability_tolerance)

    table = Table(title=f"{args.family} instance")
    table.add_column("Field", style="cyan")
    table.add_column("Value", style="magenta")
    for key, v in family.params.items():
        table.add_row(key, str(v))
    table.add_row("seed", str(args.seed))
    table.add_row("J(expert)", format_number(value(bundle.mdp, bundle.expert)))
    table.add_row("violations", str(len(violations)))
    table.add_row("files", "\n".join(str(p) for p in paths))
    Console().print(table)
    return 0 if not violations else 1


def run_command(args: argparse.Namespace, app_config: AppConfig) -> int:
    overrides = {
        key: getattr(args, key)
        for key in ("family", "algorithm", "sweep_axis", "S", "A", "H", "N", "replicates", "base_seed", "workers")
    }
    overrides["timing"] = args.timing
    if args.grid is not None:
        try:
            overrides["grid"] = [int(x) for x in args.grid.split(",")]
        except ValueError:
            raise ConfigError(f"--grid must be comma separated integers, got {args.grid!r}")
    if args.solver is not None:
        overrides["solver"] = {"kind": args.solver}

    if args.preset is not None:
        config = parse_experiment_config(read_experiment_preset(args.preset), app_config, overrides)
    else:
        config = load_experiment_config(args.experiment, app_config, overrides)
    if args.output is not None and args.output != "-":
        config = dataclasses.replace(config, output=Path(args.output))

    results = run_experiment(config)
    if args.output == "-":
        sys.stdout.write(format_csv(results))
        return 0
    output = config.output or app_config.output_dir / f"{config.family}-{config.algorithm}-{config.sweep_axis}.csv"
    write_csv(results, output)
    print_run_summary(config, results, output)
    return 0


def fit_command(args: argparse.Namespace, app_config: AppConfig) -> int:
    fit = fit_rate(
        read_csv(args.csv),
        args.x_axis,
        algo=args.algo,
        family=args.family,
        bound=args.bound,
        resamples=args.resamples or app_config.bootstrap_resamples,
        confidence=app_config.confidence_level,
    )
    if args.json:
        print(json.dumps(fit_to_dict(fit)))
    else:
        print_rate_fit(fit)
    return 0


def bounds_command(args: argparse.Namespace, app_config: AppConfig) -> int:
    records = bound_records(args.S, args.H, args.N, args.delta)
    if args.json:
        print(json.dumps([{"name": r.name, "inputs": r.inputs, "value": r.value} for r in records]))
    else:
        print_bounds(records)
    return 0


def verify_command(args: argparse.Namespace, app_config: AppConfig) -> int:
    reports = verify(args.suite, seed=args.seed, solver=app_config.solver)
    if args.json:
        print(
            json.dumps(
                [
                    {"suite": r.suite, "passed": r.passed, "checks": [dataclasses.asdict(c) for c in r.checks]}
                    for r in reports
                ]
            )
        )
    else:
        print_verify_reports(reports)
    return 0 if all(r.passed for r in reports) else 1


COMMANDS = {
    "gen-instance": gen_instance,
    "run": run_command,
    "fit": fit_command,
    "bounds": bounds_command,
    "verify": verify_command,
}
