"""
Command-line entry point: price | spread | sensitivity | selftest.
"""

import argparse
import logging
import sys
from typing import List, Optional

import numpy as np

from app import constants
from app.cli.commands import COMMAND_HANDLERS
from app.cli.reports import write_report
from app.cli.run_config import COMMANDS, FORMATS, GRID_SWEEPS, RunConfig
from app.config import configure_logging, load_config
from app.errors import PricerError, UsageError, ValidationError

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pricer", description="Indifference prices under exponential Levy models")
    parser.add_argument("command", nargs="?", choices=COMMANDS)
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--out", help="output file (stdout when omitted)")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--surface-out", help="price: CSV of the PIDE value and hedge surfaces")
    parser.add_argument(
        "--sweep", action="append", default=[], metavar="KEY=a:b:n",
        help=f"linearly spaced grid for one of {tuple(GRID_SWEEPS)}",
    )
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    return parser


def parse_sweep(text: str):
    """'spot=0.5:1.5:11' -> ('spot_grid', (0.5, 0.6, ..., 1.5))"""
    key, sep, spec = text.partition("=")
    parts = spec.split(":")
    if not sep or key not in GRID_SWEEPS or len(parts) != 3:
        raise UsageError(
            f"malformed sweep {text!r}; expected KEY=a:b:n with KEY in {tuple(GRID_SWEEPS)}"
        )
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"malformed sweep bounds in {text!r}")
    if count < 1:
        raise UsageError(f"sweep {key} needs at least one point")
    return GRID_SWEEPS[key], tuple(np.linspace(start, stop, count).tolist())


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """File, then PRICER_ environment overrides, then command-line flags."""
    try:
        cfg = RunConfig.from_dict(load_config(args.config))
    except PricerError:
        raise
    except (TypeError, ValueError, KeyError) as e:
        logger.error("Malformed configuration: %s", e)
        raise ValidationError(str(e), field_path="config") from e
    overrides = dict(parse_sweep(text) for text in args.sweep)
    for name in ("seed", "threads", "format"):
        if getattr(args, name) is not None:
            overrides[name] = getattr(args, name)
    if args.out:
        overrides["output"] = args.out
    if args.surface_out:
        overrides["surface_output"] = args.surface_out
    if args.command:
        overrides["command"] = args.command
    cfg = cfg.with_run(**overrides) if overrides else cfg
    if cfg.run.command is None:
        raise UsageError(f"no command given; expected one of {COMMANDS}")
    return cfg


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        logger.info("Running %s (measure %s)", cfg.run.command, cfg.measure)
        report = COMMAND_HANDLERS[cfg.run.command](cfg)
        write_report(report, cfg.run.format, cfg.run.output)
    except (ValidationError, UsageError) as e:
        logger.error("Invalid input: %s", e)
        return constants.EXIT_VALIDATION
    except PricerError as e:
        logger.error("Numerical failure: %s", e)
        return constants.EXIT_NUMERICAL
    except Exception as e:
        logger.exception("Unexpected failure: %s", e)
        return constants.EXIT_NUMERICAL

    if report.metadata.get("passed") is False:
        logger.error("selftest failed")
        return constants.EXIT_NUMERICAL
    return constants.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
