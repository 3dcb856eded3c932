from app.oracles.finite_difference import central_weights, fd_greeks
from app.oracles.monte_carlo import TerminalSampler, mc_linear_price
from app.oracles.report import METHODS, OracleReport
from app.oracles.sensitivity import jump_sensitivity_numeric
from app.oracles.series import merton_series_price

__all__ = [
    "METHODS",
    "OracleReport",
    "TerminalSampler",
    "central_weights",
    "fd_greeks",
    "jump_sensitivity_numeric",
    "mc_linear_price",
    "merton_series_price",
]
