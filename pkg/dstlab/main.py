import argparse
import sys
from typing import List, Optional

import structlog

from dstlab.config import settings
from dstlab.exceptions import ConfigError, DstLabError, NonFiniteLossError
from dstlab.logging_setup import configure_logging

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NON_FINITE = 3


def _int_list(value: str) -> List[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{value}'")


def _path_list(value: str) -> List[str]:
    return [part for part in value.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=settings.app_name,
                                     description="Self-training and debiased self-training experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.version}")
    parser.add_argument("--log-level", default=None, help="Overrides DSTLAB_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    run_cmd = commands.add_parser("run", help="Run one experiment")
    run_cmd.add_argument("--config", required=True)
    run_cmd.add_argument("--out", default=None, help="Run directory (default: <output_root>/<name>)")
    run_cmd.add_argument("--seed", type=int, default=None)

    sweep_cmd = commands.add_parser("sweep", help="Run one experiment per seed and aggregate")
    sweep_cmd.add_argument("--config", required=True)
    sweep_cmd.add_argument("--seeds", type=_int_list, default=_int_list(settings.default_seeds))
    sweep_cmd.add_argument("--jobs", type=int, default=settings.default_jobs)
    sweep_cmd.add_argument("--labels-per-class", type=_int_list, default=None)
    sweep_cmd.add_argument("--out", default=None)

    compare_cmd = commands.add_parser("compare", help="Tabulate and overlay finished runs")
    compare_cmd.add_argument("--runs", type=_path_list, required=True)
    compare_cmd.add_argument("--out", required=True)
    return parser


def dispatch(args: argparse.Namespace) -> None:
    if args.command == "run":
        from dstlab.services.runner import run
        run(args.config, args.out, seed=args.seed)
    elif args.command == "sweep":
        from dstlab.workers.pool import sweep
        payload = sweep(args.config, args.seeds, jobs=args.jobs, out_dir=args.out,
                        labels_per_class=args.labels_per_class)
        if payload["partial"]:
            raise DstLabError("sweep finished with failed runs; see aggregate.json")
    elif args.command == "compare":
        from dstlab.services.comparison import compare
        compare(args.runs, args.out)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        dispatch(args)
    except ConfigError as e:
        logger.error("Invalid configuration", command=args.command, error=str(e))
        return EXIT_CONFIG
    except NonFiniteLossError as e:
        logger.error("Training diverged", command=args.command, error=str(e))
        return EXIT_NON_FINITE
    except DstLabError as e:
        logger.error("Command failed", command=args.command, error=str(e))
        return EXIT_FAILURE
    except Exception as e:
        logger.error("Unexpected error", command=args.command, error=str(e), exc_info=True)
        raise
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
