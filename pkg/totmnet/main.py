"""Command-line entry point: synth, train, eval, check, bench and ablate subcommands"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .config import settings
from .core.errors import (
    CheckpointMismatchError,
    ConfigurationError,
    CorrectnessError,
    DivergenceError,
)
from .models.config_models import Domain, RunConfig, Split, Variant

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3
EXIT_CHECKPOINT_MISMATCH = 4

logger = logging.getLogger(__name__)


def configure_logging() -> None:
    """Root logger: stdout handler plus an optional file handler, level from settings."""
    level = logging.DEBUG if settings.debug else getattr(logging, settings.log_level.upper(), logging.INFO)
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    if not root_logger.handlers:
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        root_logger.addHandler(console_handler)
        if settings.log_file:
            file_handler = logging.FileHandler(settings.log_file, mode='a')
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)


def load_run_config(path: Optional[str]) -> RunConfig:
    """
    Parse a JSON run config; absent path means all defaults.

    Raises:
        ValidationError: on unknown keys or violated constraints
        OSError: if the file cannot be read
    """
    if path is None:
        return RunConfig()
    return RunConfig.model_validate_json(Path(path).read_text())


def describe_validation_error(e: ValidationError) -> str:
    first = e.errors()[0]
    where = ".".join(str(part) for part in first["loc"]) or "<root>"
    return f"invalid config at '{where}': {first['msg']}"


# -------------
# Subcommands
# -------------

def cmd_synth(args: argparse.Namespace) -> int:
    from .tools.synth_tools import export_clip, make_dataset

    cfg = load_run_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "resolved_config.json").write_text(cfg.model_dump_json(indent=2))
    clips = make_dataset(cfg.synth, args.n, args.split, args.domain)
    for clip in clips:
        export_clip(clip, out_dir, cfg.synth.fs)
    logger.info(f"✅ Wrote {len(clips)} {args.split}/{args.domain} clips to {out_dir}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    from .orchestration.training_workflow import TrainingWorkflow

    cfg = load_run_config(args.config)
    workflow = TrainingWorkflow(cfg)
    if args.variant:
        workflow = workflow.with_variant(args.variant)
    workflow.run_training(args.out)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    from .orchestration.training_workflow import TrainingWorkflow

    cfg = load_run_config(args.config)
    report = TrainingWorkflow(cfg).run_evaluation(args.checkpoint, args.domain, args.out)
    print(report.metrics.model_dump_json())
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    from .orchestration.check_suite import run_checks

    results = run_checks(inject_fault=args.inject_fault, seed=settings.default_seed)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name} ({result.seconds:.2f}s) {result.detail}")
    failed = [result.name for result in results if not result.passed]
    print(f"{len(results)} suites, {len(failed)} failed")
    if failed:
        logger.error(f"❌ Failing suites: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    from .orchestration.benchmark import fit_loglog_slopes, power_of_two_range, run_bench
    from .tools.report_tools import write_bench_csv

    t_values = power_of_two_range(args.t_min, args.t_max)
    records = run_bench(t_values, d=args.d, B=args.B, reps=args.reps, seed=settings.default_seed)
    write_bench_csv(args.csv, records)
    for method, slope in fit_loglog_slopes(records).items():
        print(f"log-log slope {method}: {slope:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    from .orchestration.ablation_workflow import run_ablation

    run_ablation(load_run_config(args.config), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="totmnet",
        description="Toeplitz temporal mixing for remote photoplethysmography on synthetic clips",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate and export synthetic clips")
    synth.add_argument("--config", help="JSON run config (defaults if omitted)")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--n", type=int, default=1, help="number of clips")
    synth.add_argument("--domain", choices=[d.value for d in Domain], default=Domain.A.value)
    synth.add_argument("--split", choices=[s.value for s in Split], default=Split.train.value)
    synth.set_defaults(handler=cmd_synth)

    train = sub.add_parser("train", help="train a model on synthetic domain-A clips")
    train.add_argument("--config", help="JSON run config (defaults if omitted)")
    train.add_argument("--out", required=True, help="output directory")
    train.add_argument("--variant", choices=[v.value for v in Variant], help="override model.variant")
    train.set_defaults(handler=cmd_train)

    evaluate = sub.add_parser("eval", help="evaluate a checkpoint on a test split")
    evaluate.add_argument("--checkpoint", required=True)
    evaluate.add_argument("--config", help="JSON run config (defaults if omitted)")
    evaluate.add_argument("--domain", choices=[d.value for d in Domain], default=Domain.A.value)
    evaluate.add_argument("--out", required=True, help="metrics CSV path")
    evaluate.set_defaults(handler=cmd_eval)

    check = sub.add_parser("check", help="run the oracle suites")
    check.add_argument("--inject-fault", choices=["adjoint"], default=None, help=argparse.SUPPRESS)
    check.set_defaults(handler=cmd_check)

    bench = sub.add_parser("bench", help="time FFT vs dense Toeplitz mixing")
    bench.add_argument("--t-min", type=int, default=256)
    bench.add_argument("--t-max", type=int, default=8192)
    bench.add_argument("--csv", required=True, help="output CSV path")
    bench.add_argument("--d", type=int, default=32)
    bench.add_argument("--B", type=int, default=4)
    bench.add_argument("--reps", type=int, default=5)
    bench.set_defaults(handler=cmd_bench)

    ablate = sub.add_parser("ablate", help="train and evaluate all three variants")
    ablate.add_argument("--config", help="JSON run config (defaults if omitted)")
    ablate.add_argument("--out", required=True, help="output directory")
    ablate.set_defaults(handler=cmd_ablate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run the subcommand and map failures to exit codes."""
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        return args.handler(args)
    except ValidationError as e:
        message = describe_validation_error(e)
        print(f"error: {message}", file=sys.stderr)
        logger.error(message)
        return EXIT_USAGE
    except CheckpointMismatchError as e:
        print(f"error: checkpoint mismatch: {e}", file=sys.stderr)
        logger.error(f"Checkpoint mismatch: {e}")
        return EXIT_CHECKPOINT_MISMATCH
    except (ConfigurationError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        logger.error(f"Configuration error: {e}", exc_info=settings.debug)
        return EXIT_USAGE
    except DivergenceError as e:
        print(f"error: training diverged: {e}", file=sys.stderr)
        logger.error(f"Training diverged: {e}", exc_info=True)
        return EXIT_DIVERGED
    except CorrectnessError as e:
        print(f"error: {e}", file=sys.stderr)
        logger.error(f"Correctness failure: {e}", exc_info=True)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
