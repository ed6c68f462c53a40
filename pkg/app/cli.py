# app/cli.py

"""
Command-line harness.

    python -m app run    [--config FILE] [--seed N] [--mode M] [--out DIR] [--trace]
    python -m app sweep  (--config FILE | --preset figN) [--runs N] [--workers N] [--out DIR]
    python -m app oracle [--seed N] [--cases N] [--sequences N] [--out DIR]

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from app.config import get_settings
from app.core.errors import ConfigError
from app.core.experiment import run_scenario, run_scenario_traced, run_sweep, summary_text
from app.core.oracles import run_oracles
from app.core.presets import PRESETS, preset
from app.storage import (
    DATA_FILE,
    METRICS_FILE,
    SUMMARY_FILE,
    TRACE_FILE,
    ensure_dir,
    load_scenario_file,
    load_sweep_file,
    scenario_from_mapping,
    write_csv,
    write_metrics_json,
    write_summary,
    write_trace_jsonl,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2

MODES = ("defenseless", "ocean", "sechand")


def configure_logging(quiet: bool = False) -> None:
    settings = get_settings()
    level = logging.WARNING if quiet else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocean-sim", description="OCEAN ad hoc network simulator")
    commands = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--quiet", action="store_true", help="only log warnings and errors")
    common.add_argument("--seed", type=int, default=None, help="seed (sweeps: first seed)")

    run = commands.add_parser("run", parents=[common], help="run a single scenario")
    run.add_argument("--config", type=Path, default=None, help="scenario file (key=value)")
    run.add_argument("--mode", choices=MODES, default=None)
    run.add_argument("--trace", action="store_true", help="write trace.jsonl")

    sweep = commands.add_parser("sweep", parents=[common], help="run a multi-seed sweep")
    source = sweep.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", type=Path, help="sweep file (key=value)")
    source.add_argument("--preset", choices=sorted(PRESETS), help="built-in figure design")
    sweep.add_argument("--mode", choices=MODES, default=None, help="override the base mode")
    sweep.add_argument("--runs", type=int, default=None, help="runs per point")
    sweep.add_argument("--duration", type=float, default=None, help="simulated seconds per run")
    sweep.add_argument("--workers", type=int, default=None, help="worker processes")
    sweep.add_argument("--trace", action="store_true", help="write one trace per run under traces/")

    oracle = commands.add_parser("oracle", parents=[common], help="run the reference oracles")
    oracle.add_argument("--cases", type=int, default=200, help="random discovery topologies")
    oracle.add_argument("--sequences", type=int, default=1000, help="random rating sequences")

    return parser


# ============================================
# Commands
# ============================================

def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.mode is not None:
        overrides["mode"] = args.mode
    return overrides


def cmd_run(args: argparse.Namespace) -> int:
    overrides = _overrides(args)
    if args.config is not None:
        cfg = load_scenario_file(args.config, overrides)
    else:
        cfg = scenario_from_mapping(overrides, "command line")

    out = ensure_dir(args.out or get_settings().output_dir)
    if args.trace or get_settings().write_traces:
        metrics, trace = run_scenario_traced(cfg)
        write_trace_jsonl(trace, out / TRACE_FILE)
    else:
        metrics = run_scenario(cfg)
    write_metrics_json(metrics, out / METRICS_FILE)

    print(
        f"seed={metrics.seed} mode={metrics.mode} delivered {metrics.delivered}/{metrics.originated} "
        f"(ratio {metrics.delivery_ratio:.4f}, cooperating {metrics.classes['cooperating'].delivery_ratio:.4f})"
    )
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    mode_override = {"mode": args.mode} if args.mode else {}
    if args.preset:
        spec = preset(args.preset, runs_per_point=args.runs, sim_duration=args.duration, seed_base=args.seed)
        if mode_override:
            spec = spec.model_copy(update={"base": spec.base.model_copy(update=mode_override)})
    else:
        spec = load_sweep_file(args.config, mode_override)
        update: dict[str, Any] = {}
        if args.runs is not None:
            update["runs_per_point"] = args.runs
        if args.seed is not None:
            update["seed_base"] = args.seed
        if args.duration is not None:
            update["base"] = spec.base.model_copy(update={"sim_duration": args.duration})
        if update:
            spec = spec.model_validate({**spec.model_dump(), **update})

    out = ensure_dir(args.out or Path(get_settings().output_dir) / spec.name)
    trace_dir = out / "traces" if args.trace or get_settings().write_traces else None
    result = run_sweep(spec, workers=args.workers, trace_dir=trace_dir)

    write_csv(result, out / DATA_FILE)
    summary = summary_text(result)
    write_summary(summary, out / SUMMARY_FILE)
    if not args.quiet:
        print(summary, end="")
    if result.failures:
        logger.warning("%d run(s) failed; see the error column of %s", result.failures, out / DATA_FILE)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    report = run_oracles(
        seed=args.seed or 0, rating_sequences=args.sequences, discovery_cases=args.cases
    )
    if args.out is not None:
        path = ensure_dir(args.out) / "oracle.json"
        path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    print(report.model_dump_json(indent=2))
    return EXIT_OK if report.passed else EXIT_FAILURE


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "oracle": cmd_oracle}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.quiet)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValidationError as exc:
        print(f"error: {ConfigError.from_validation(exc)}", file=sys.stderr)
        return EXIT_INVALID
    except Exception:
        logger.exception("%s failed", args.command)
        return EXIT_FAILURE
