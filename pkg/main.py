#!/usr/bin/env python3
"""
Carnot Hardy Verifier - Main Entry Point
Numerical verification of Hardy inequalities on stratified groups.
"""

import sys
import json
import shutil
import signal
import logging
import argparse
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

# Add project root to path for imports
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from config.settings import Settings, ConfigurationError
from core.hardy_engine import HardyEngine, InequalityReport
from core.report_generator import ReportGenerator
from core.sharpness import constant_objective, probe_constant, sweep_beta
from core.statements import evaluate, get_statement, list_statements
from utils.validators import (
    RunCase,
    ValidationError,
    load_probe_config,
    load_run_config,
    split_beta_range,
)

# Import version from package
try:
    from __init__ import __version__
except ImportError:
    __version__ = "unknown"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VIOLATED = 2
EXIT_INTERRUPTED = 130

BUNDLED_RUNS = project_root / "config" / "runs"


def signal_handler(signum, frame):
    """Turn SIGTERM into the same path as Ctrl-C."""
    raise KeyboardInterrupt


def setup_signal_handlers() -> None:
    signal.signal(signal.SIGTERM, signal_handler)


def setup_logging(settings: Settings, debug: bool = False) -> None:
    """Configure logging for the application."""
    log_level = logging.DEBUG if debug else getattr(logging, settings.log_level.upper(), logging.INFO)

    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stdout),
        ],
        force=True,
    )


def report_error(error: Exception) -> None:
    """Machine-readable error object on stderr."""
    print(json.dumps({"error": type(error).__name__, "message": str(error)}), file=sys.stderr)


def _evaluate_task(
    engine: HardyEngine, case: RunCase, task: Tuple[int, object, Optional[float], Optional[float], str]
) -> InequalityReport:
    _, u, beta, p, kind = task
    statement = get_statement(case.statement)
    return evaluate(engine, statement, case.group, case.domain, u, beta, p, kind, case.rule)


def run_verification(settings: Settings, config_path: str, output_dir: Optional[str] = None) -> int:
    """Evaluate every row of a run config and write its reports.

    Rows run on ``settings.threads`` workers; results keep config order.
    """
    logger = logging.getLogger(__name__)
    config = load_run_config(config_path, settings)
    engine = HardyEngine(settings)
    generator = ReportGenerator(settings)
    stem = Path(config_path).stem
    logger.info(f"Verifying {config.row_count} row(s) from {config_path} on {settings.threads} thread(s)")

    jobs = [(case, task) for case in config.cases for task in case.tasks()]
    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        reports: List[InequalityReport] = list(
            pool.map(lambda job: _evaluate_task(engine, job[0], job[1]), jobs)
        )

    base = Path(output_dir) if output_dir else None
    csv_path = config.output_csv or generator.default_path(stem, ".csv")
    json_path = config.output_json or generator.default_path(stem, ".json")
    if base is not None:
        csv_path, json_path = base / Path(csv_path).name, base / Path(json_path).name
    generator.write_csv(reports, csv_path)
    generator.write_json(
        reports,
        json_path,
        metadata={"config": str(config_path), "seed": config.seed, "version": __version__},
    )
    generator.write_markdown_summary(reports, Path(csv_path).with_suffix(".md"))

    summary = generator.summarize(reports)
    print(f"✅ {summary['rows']} row(s), {summary['violations']} violation(s) -> {csv_path}")
    if summary["violations"]:
        logger.warning(f"{summary['violations']} row(s) violated beyond tolerance")
        return EXIT_VIOLATED
    return EXIT_OK


def run_sweep(settings: Settings, args: argparse.Namespace) -> int:
    """Grid sweep of the beta-dependent constant of a statement."""
    statement = args.statement
    p = args.p
    if args.config:
        config = load_run_config(args.config, settings)
        if config.cases:
            first = config.cases[0]
            statement = statement or first.statement
            if p is None and first.ps and first.ps[0] is not None:
                p = first.ps[0]
    if not statement:
        raise ValidationError("Sweep needs --statement or a run config")
    get_statement(statement)
    beta_range = args.beta_range or settings.sharpness.beta_range
    lo, hi, step = split_beta_range(beta_range)
    result = sweep_beta(constant_objective(statement, p), lo, hi, step, refine=settings.sharpness.refine)

    generator = ReportGenerator(settings)
    suffix = "" if p is None else f"_p{p:g}"
    out = args.output or generator.default_path(f"sweep_{statement}{suffix}", ".csv")
    generator.write_sweep_csv(result.rows(), out)
    beta_star, value_star = result.best
    print(f"✅ {statement}: argmax beta = {beta_star:.12g}, constant = {value_star:.12g} -> {out}")
    return EXIT_OK


def run_probe(settings: Settings, args: argparse.Namespace) -> int:
    """Lowest Rayleigh quotient over a family of trial functions."""
    family_path = args.family or args.config
    if not family_path:
        raise ValidationError("Probe needs a family config (positional or --family)")
    config = load_probe_config(family_path, settings)
    result = probe_constant(config.group, config.halfspace, config.functions, config.rule, settings)
    rows = result.rows()
    for row, u in zip(rows, config.functions):
        row["kind"] = u.kind.value
        row["alpha"] = u.alpha
    generator = ReportGenerator(settings)
    out = args.output or config.output_csv or generator.default_path(f"probe_{Path(family_path).stem}", ".csv")
    generator.write_probe_csv(rows, out)
    print(f"✅ lowest quotient {result.estimate:.12g} at member #{result.index} -> {out}")
    return EXIT_OK


def run_list_statements(as_json: bool = False) -> int:
    statements = list_statements()
    if as_json:
        print(json.dumps([s.to_dict() for s in statements], indent=2))
        return EXIT_OK
    for s in statements:
        print(f"{s.id:10} {s.location:20} {s.title}")
        print(f"{'':10} {s.hypothesis()}")
    return EXIT_OK


def run_emit_example_configs(target: str) -> int:
    """Copy the bundled run configs into ``target``."""
    out_dir = Path(target)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for source in sorted(BUNDLED_RUNS.glob("*.json")):
        destination = out_dir / source.name
        if destination.resolve() != source.resolve():
            shutil.copyfile(source, destination)
        written.append(destination)
    print(f"✅ Wrote {len(written)} example config(s) to {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardy-verify",
        description="Carnot Hardy Verifier - numerical checks of Hardy inequalities on stratified groups"
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}"
    )
    parser.add_argument(
        "--config",
        dest="settings_path",
        help="Path to settings YAML file"
    )
    parser.add_argument(
        "--env",
        help="Path to environment file"
    )
    parser.add_argument(
        "--debug",
        action="store_true",
        help="Enable debug logging"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="Evaluate a run config and write reports")
    verify.add_argument("config", help="Run config (JSON)")
    verify.add_argument("--output-dir", help="Directory for report files")

    sweep = sub.add_parser("sweep", help="Sweep beta through a statement's constant")
    sweep.add_argument("config", nargs="?", help="Run config supplying statement and p")
    sweep.add_argument("--statement", help="Statement id")
    sweep.add_argument("--beta-range", help="'lo:hi:step'")
    sweep.add_argument("--p", type=float, help="Exponent for the L^p constants")
    sweep.add_argument("--output", help="CSV output path")

    probe = sub.add_parser("probe", help="Bracket a Hardy constant with trial functions")
    probe.add_argument("config", nargs="?", help="Probe family config (JSON)")
    probe.add_argument("--family", help="Probe family config (JSON)")
    probe.add_argument("--output", help="CSV output path")

    listing = sub.add_parser("list-statements", help="Show the statement catalog")
    listing.add_argument("--json", action="store_true", help="Print the catalog as JSON")

    emit = sub.add_parser("emit-example-configs", help="Write the bundled run configs")
    emit.add_argument("dir", nargs="?", default="config/runs", help="Target directory")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        setup_signal_handlers()

        # Initialize configuration
        settings = Settings(config_path=args.settings_path, env_path=args.env)
        if args.debug:
            settings.config.setdefault('app', {})['debug'] = True

        setup_logging(settings, debug=args.debug or settings.debug_mode)
        logger = logging.getLogger(__name__)
        logger.debug(f"Starting {settings.app_name} v{settings.app_version}: {args.command}")

        if args.command == "verify":
            return run_verification(settings, args.config, args.output_dir)
        if args.command == "sweep":
            return run_sweep(settings, args)
        if args.command == "probe":
            return run_probe(settings, args)
        if args.command == "list-statements":
            return run_list_statements(args.json)
        return run_emit_example_configs(args.dir)

    except (ConfigurationError, ValidationError) as e:
        report_error(e)
        return EXIT_INVALID

    except KeyboardInterrupt:
        print("\n\n👋 Interrupted. Goodbye!", file=sys.stderr)
        return EXIT_INTERRUPTED

    except Exception as e:
        print(f"❌ Unexpected error: {e}", file=sys.stderr)
        if args.debug:
            import traceback
            traceback.print_exc()
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
