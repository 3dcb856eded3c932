"""
Cash greeks by central differences of bs_price with Richardson extrapolation.
"""

import logging
import math

import numpy as np

from app import constants
from app.bs_engine import MAX_GREEK_ORDER, BsContext, OptionSpec, bs_price
from app.errors import ConvergenceError, DomainError
from app.oracles.report import OracleReport

logger = logging.getLogger(__name__)

ACCEPTED_RELATIVE_ERROR = 1e-3


def central_weights(order: int) -> np.ndarray:
    """
    Weights w_i on offsets i = -p .. p with sum_i w_i f(x + i h) / h^order ~ f^(order)(x),
    second-order accurate.
    """
    half = (order + 1) // 2
    offsets = np.arange(-half, half + 1, dtype=float)
    vandermonde = np.vander(offsets, increasing=True).T
    rhs = np.zeros(offsets.size)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(vandermonde, rhs)


def fd_greeks(opt: OptionSpec, ctx: BsContext, s: float, order: int) -> OracleReport:
    """
    s^n d^n P / ds^n. The base step is s * eps^{1/(n+2)}; the table is built on
    4h, 2h, h and the error estimate is the last extrapolation correction.
    """
    if not 1 <= order <= MAX_GREEK_ORDER:
        raise DomainError(f"greek order must lie in [1, {MAX_GREEK_ORDER}], got {order}")
    ctx.tau(opt)

    weights = central_weights(order)
    half = weights.size // 2
    base = s * np.finfo(float).eps ** (1.0 / (order + 2))
    depth = constants.RICHARDSON_DEPTH
    steps = base * 2.0 ** np.arange(depth - 1, -1, -1)
    if s - half * steps[0] <= 0:
        raise DomainError(f"spot {s} too close to zero for a {order}-th difference")

    table = []
    for level, h in enumerate(steps):
        points = s + h * np.arange(-half, half + 1)
        row = [float(weights @ bs_price(opt, ctx, points)) / h**order]
        for j in range(1, level + 1):
            row.append(row[j - 1] + (row[j - 1] - table[level - 1][j - 1]) / (4.0**j - 1.0))
        table.append(row)

    derivative = table[-1][-1]
    error = abs(table[-1][-1] - table[-1][-2]) if depth > 1 else abs(derivative)
    scale = max(abs(derivative), abs(table[-1][0]), 1e-8)
    if error > ACCEPTED_RELATIVE_ERROR * scale:
        logger.error("Richardson table for order %d did not settle: %s", order, table[-1])
        raise ConvergenceError(
            "finite-difference extrapolation", achieved=error / scale,
            required=ACCEPTED_RELATIVE_ERROR,
        )
    return OracleReport(
        value=s**order * derivative, method="finite-diff", error_estimate=s**order * error
    )
