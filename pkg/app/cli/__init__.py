from app.cli.commands import (
    COMMAND_HANDLERS,
    cmd_price,
    cmd_selftest,
    cmd_sensitivity,
    cmd_spread,
)
from app.cli.main import build_parser, main, parse_sweep, resolve_config
from app.cli.reports import PriceReport, generate_pdf, write_report, write_surface
from app.cli.run_config import RunConfig, RunSection

__all__ = [
    "COMMAND_HANDLERS",
    "PriceReport",
    "RunConfig",
    "RunSection",
    "build_parser",
    "cmd_price",
    "cmd_selftest",
    "cmd_sensitivity",
    "cmd_spread",
    "generate_pdf",
    "main",
    "parse_sweep",
    "resolve_config",
    "write_report",
    "write_surface",
]
