"""
Command-line entry point

    thermoporo [--config PATH] [--out DIR] [--grid N] [--xi {0,1}] [--set KEY=VALUE ...]
               {groups,solve,sweep,converge,transient} ...

Exit codes: 0 success, 1 usage or config error, 2 solver failure.
"""

import argparse
import asyncio
import sys
from typing import Optional, Sequence

from .commands import cmd_converge, cmd_groups, cmd_solve, cmd_sweep, cmd_transient
from .config import RunConfig, get_settings, parse_config
from .error_handler import EXIT_OK, EXIT_USAGE, handle_failed_run
from .logger import configure_logging, get_logger

logger = get_logger(__name__)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _split(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in _split(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in _split(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thermoporo", description="Biphasic thermo-poroelastic solvers")
    parser.add_argument("--config", help="Run configuration file")
    parser.add_argument("--out", help="Output directory (output.directory)")
    parser.add_argument("--grid", type=int, help="Grid nodes (solver.grid_nodes)")
    parser.add_argument("--xi", type=int, choices=(0, 1), help="Thermal coupling of the solid")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config value; repeatable",
    )

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    groups = sub.add_parser("groups", help="Print the dimensionless groups")
    groups.add_argument("--key-value", action="store_true", help="Flat name=value output")

    sub.add_parser("solve", help="Run the configured model")

    sweep = sub.add_parser("sweep", help="Solve over values of one config key")
    sweep.add_argument("--key", required=True, help="Config key, e.g. dimensional.kappa_s")
    sweep.add_argument("--values", required=True, type=_float_list, help="Comma-separated")
    sweep.add_argument("--threads", type=int, help="Concurrency cap (THERMOPORO_THREADS)")

    converge = sub.add_parser("converge", help="Grid convergence study")
    converge.add_argument("--grids", type=_int_list, help="Comma-separated odd node counts")

    transient = sub.add_parser("transient", help="Radial transient simulation")
    transient.add_argument("--times", type=_float_list, help="Comma-separated snapshot times")
    return parser


def _overrides(args: argparse.Namespace) -> list[str]:
    overrides = list(args.overrides)
    if args.out is not None:
        overrides.append(f"output.directory={args.out}")
    if args.grid is not None:
        overrides.append(f"solver.grid_nodes={args.grid}")
    if args.xi is not None:
        overrides.append(f"scenario.xi={args.xi}")
    return overrides


def _run(args: argparse.Namespace, cfg: RunConfig) -> None:
    if args.command == "groups":
        sys.stdout.write(cmd_groups(cfg, key_value=args.key_value))
    elif args.command == "solve":
        result = cmd_solve(cfg)
        for key, value in result.summary.items():
            sys.stdout.write(f"{key}={value}\n")
    elif args.command == "sweep":
        rows = asyncio.run(cmd_sweep(cfg, args.key, args.values, threads=args.threads))
        sys.stdout.write(f"{len(rows)} cases written to {cfg.output.directory}\n")
    elif args.command == "converge":
        for row in cmd_converge(cfg, args.grids):
            sys.stdout.write(", ".join(f"{k}={v}" for k, v in row.items()) + "\n")
    elif args.command == "transient":
        snapshots = cmd_transient(cfg, args.times)
        sys.stdout.write(f"{len(snapshots)} snapshots written to {cfg.output.directory}\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one subcommand and return the exit code

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        0 on success, 1 on usage errors, 2 on solver failures
    """
    settings = get_settings()
    configure_logging(settings.log_level, settings.log_format)
    args = build_parser().parse_args(argv)

    try:
        cfg = parse_config(args.config, _overrides(args))
        _run(args, cfg)
    except Exception as e:
        code = handle_failed_run(args.command, e)
        sys.stderr.write(f"thermoporo {args.command}: {e}\n")
        return code

    logger.info(f"Command '{args.command}' finished", extra={"command": args.command})
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
