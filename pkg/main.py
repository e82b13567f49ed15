"""
extprobe command line.

    extprobe CONFIG [--task TASK] [--out DIR] [--threads K] [--verbose]

Runs one task of the configuration file and returns 0 on success, 2 on
configuration errors or bad inputs, 3 on numerical or unexpected failures
and 4 when a validation tolerance is missed.
"""

import argparse
import sys

from rich.console import Console
from rich.markup import escape

from cli.config import load_config, resolve_threads
from cli.runner import EXIT_NUMERICAL, describe_error, exit_code, run
from core.errors import ExtProbeError
from logger import configure_console, get_logger

log = get_logger("main")

TASKS = ("constants", "validate", "solve", "probe", "reconstruct", "stability")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extprobe", description="Boundary probes of a weighted extension problem.")
    parser.add_argument("config", help="TOML or JSON run configuration")
    parser.add_argument("--task", choices=TASKS, help="override the configured task")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, help="worker threads (EXTPROBE_THREADS wins)")
    parser.add_argument("--verbose", "-v", action="store_true", help="log to the console")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    console = Console(stderr=True)
    if args.verbose:
        configure_console("DEBUG")
    try:
        config = load_config(args.config).with_overrides(
            task=args.task, out=args.out, threads=resolve_threads(args.threads)
        )
    except ExtProbeError as exc:
        console.print(f"[red]{escape(describe_error(exc))}[/red]")
        return exit_code(exc)
    except Exception as exc:
        console.print(f"[red]{escape(describe_error(exc))}[/red]")
        log.exception(describe_error(exc))
        return EXIT_NUMERICAL
    return run(config, console)


if __name__ == "__main__":
    sys.exit(main())
