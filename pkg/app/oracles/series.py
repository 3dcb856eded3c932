"""
Merton closed-form price: Black-Scholes prices conditional on the number of jumps,
weighted by Poisson probabilities.
"""

import logging
import math

from scipy.stats import poisson

from app import constants
from app.bs_engine import BsContext, OptionSpec, bs_price
from app.errors import ConvergenceError, DomainError
from app.levy_core import MertonParams
from app.oracles.report import OracleReport

logger = logging.getLogger(__name__)


def _branch_put(put: OptionSpec, p: MertonParams, n: int) -> float:
    """Put price given n jumps: spot and variance shifted by the jump contribution."""
    maturity = put.maturity
    log_spot = (
        math.log(put.spot)
        - p.lambda_m * p.kappa * maturity
        + n * (p.gamma_j + 0.5 * p.delta_j**2)
    )
    variance = p.sigma**2 + n * p.delta_j**2 / maturity
    spot = math.exp(log_spot)
    if variance == 0:
        return put.payoff(spot)
    return bs_price(put, BsContext(vol=math.sqrt(variance)), spot)


def merton_series_price(opt: OptionSpec, p: MertonParams) -> OracleReport:
    """
    E*[H] for the martingale Merton model. Calls go through put-call parity, so the
    truncation bound is the Poisson tail weight times the strike.
    """
    if p.mu is not None and abs(p.mu - p.martingale_mu) > constants.MEMM_DRIFT_TOLERANCE:
        raise DomainError(f"mu={p.mu} is not the martingale drift {p.martingale_mu}")

    put = opt.with_(kind="put")
    intensity = p.lambda_m * opt.maturity
    value = 0.0
    tail = 1.0
    for n in range(constants.SERIES_MAX_TERMS):
        value += poisson.pmf(n, intensity) * _branch_put(put, p, n)
        tail = poisson.sf(n, intensity)
        if tail < constants.SERIES_TAIL_WEIGHT:
            break
    else:
        bound = tail * opt.strike
        if bound > constants.SERIES_REL_TOLERANCE * abs(value):
            raise ConvergenceError(
                "Merton series truncation", achieved=bound,
                required=constants.SERIES_REL_TOLERANCE * abs(value),
            )

    if not opt.is_put:
        value += opt.spot - opt.strike
    logger.debug("Merton series %s: %.12g after %d terms", opt, value, n + 1)
    return OracleReport(value=float(value), method="series", error_estimate=tail * opt.strike)
