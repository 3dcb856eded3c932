"""
Second-order asymptotic indifference price around Black-Scholes (small-jump
expansion at unit scale), bid-ask spread and the jump-risk sensitivity.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from app.bs_engine import BsContext, OptionSpec, bs_price, cash_greeks, gamma_integral
from app.errors import DomainError, UsageError, ValidationError
from app.levy_core import GroupParams

logger = logging.getLogger(__name__)

SWEEP_KEYS = ("spot", "alpha", "strike", "maturity")


@dataclass(frozen=True)
class AsymptoticPrice:
    """Per-term breakdown of the seller's asymptotic indifference price."""

    option: OptionSpec
    alpha: float
    bs_term: float
    m3_term: float
    m4_term: float
    m3sq_term: float
    nonlinear_term: float
    total: float

    @classmethod
    def from_terms(cls, option, alpha, bs_term, m3_term, m4_term, m3sq_term, nonlinear_term):
        total = bs_term + m3_term + m4_term + m3sq_term + nonlinear_term
        return cls(option, alpha, bs_term, m3_term, m4_term, m3sq_term, nonlinear_term, total)

    @property
    def linear(self) -> float:
        """Expansion of the linear price E*[H]."""
        return self.bs_term + self.m3_term + self.m4_term + self.m3sq_term

    @property
    def outside_hypotheses(self) -> bool:
        """Calls have unbounded pay-offs, outside the expansion's stated assumptions."""
        return not self.option.is_put

    def to_row(self) -> dict:
        row = asdict(self.option)
        row.update({k: v for k, v in asdict(self).items() if k != "option"})
        row["linear"] = self.linear
        row["outside_hypotheses"] = self.outside_hypotheses
        return row


@dataclass(frozen=True)
class AsymptoticQuote:
    seller: float
    buyer: float
    mid: float

    @property
    def spread(self) -> float:
        return self.seller - self.buyer


@dataclass(frozen=True)
class SpreadDecomposition:
    alpha: float
    model_factor: float
    option_factor: float

    @property
    def spread(self) -> float:
        return 2.0 * (self.alpha / 8.0 * self.model_factor * self.option_factor)


def _check_inputs(gp: GroupParams, alpha: float) -> None:
    if not alpha >= 0:
        raise ValidationError("must be >= 0", field_path="alpha")
    if gp.m4 * gp.sigma_bar_sq - gp.m3**2 < -1e-12 * max(gp.sigma_bar_sq**2, gp.m3**2):
        raise DomainError("group parameters violate m4 * sigma_bar^2 >= m3^2")


def jump_sensitivity(opt: OptionSpec, sigma_bar: float) -> float:
    """
    E^BS[ int_0^T (S_t^2 P_BS''(t, S_t))^2 dt ]: model-independent jump-risk exposure.

    Put and call share the value since their second derivatives coincide.
    """
    return gamma_integral(opt.strike, opt.spot, opt.maturity, sigma_bar)


def _nonlinear_term(alpha: float, gp: GroupParams, sensitivity: float) -> float:
    return alpha / 8.0 * gp.model_factor * sensitivity


def asymptotic_price(opt: OptionSpec, gp: GroupParams, alpha: float) -> AsymptoticPrice:
    """
    P_BS + (m3 T/6) d3 + (m4 T/24) d4 + (m3^2 T^2/72)(6 d3 + 18 d4 + 9 d5 + d6)
    + (alpha/8)(m4 - m3^2/sigma_bar^2) * jump_sensitivity, with d_n the cash greeks
    at volatility sigma_bar.
    """
    _check_inputs(gp, alpha)
    ctx = BsContext(vol=gp.sigma_bar, t=0.0)
    s0, maturity = opt.spot, opt.maturity
    _, _, d3, d4, d5, d6 = cash_greeks(opt, ctx, s0, 6)

    price = AsymptoticPrice.from_terms(
        option=opt,
        alpha=alpha,
        bs_term=bs_price(opt, ctx, s0),
        m3_term=gp.m3 * maturity / 6.0 * float(d3),
        m4_term=gp.m4 * maturity / 24.0 * float(d4),
        m3sq_term=gp.m3**2 * maturity**2 / 72.0 * float(6 * d3 + 18 * d4 + 9 * d5 + d6),
        nonlinear_term=_nonlinear_term(alpha, gp, jump_sensitivity(opt, gp.sigma_bar)),
    )
    logger.debug("Asymptotic price %s: %s", opt, price.total)
    return price


def bid_ask_spread(opt: OptionSpec, gp: GroupParams, alpha: float) -> float:
    """(alpha/4)(m4 - m3^2/sigma_bar^2) * jump_sensitivity, twice the nonlinear term."""
    _check_inputs(gp, alpha)
    return 2.0 * _nonlinear_term(alpha, gp, jump_sensitivity(opt, gp.sigma_bar))


def spread_decomposition(opt: OptionSpec, gp: GroupParams, alpha: float) -> SpreadDecomposition:
    """Risk aversion, model factor and option factor whose product is the spread."""
    _check_inputs(gp, alpha)
    return SpreadDecomposition(
        alpha=alpha,
        model_factor=gp.model_factor,
        option_factor=jump_sensitivity(opt, gp.sigma_bar),
    )


def asymptotic_quote(opt: OptionSpec, gp: GroupParams, alpha: float) -> AsymptoticQuote:
    """Seller and buyer prices: the linear part plus or minus the nonlinear term."""
    price = asymptotic_price(opt, gp, alpha)
    return AsymptoticQuote(
        seller=price.total, buyer=price.linear - price.nonlinear_term, mid=price.linear
    )


def _check_grid(values: Sequence[float], key: str) -> np.ndarray:
    if key not in SWEEP_KEYS:
        raise UsageError(f"unknown sweep key {key!r}; expected one of {SWEEP_KEYS}")
    grid = np.asarray(values, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise UsageError(f"{key} grid must be a non-empty list of numbers")
    steps = np.diff(grid)
    if grid.size > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise UsageError(f"{key} grid must be strictly monotone")
    return grid


def price_curve(
    opt: OptionSpec,
    gp: GroupParams,
    alpha: float,
    sweep: str,
    values: Sequence[float],
    threads: Optional[int] = None,
) -> List[AsymptoticPrice]:
    """One AsymptoticPrice per grid point, in grid order."""
    grid = _check_grid(values, sweep)

    def evaluate(value: float) -> AsymptoticPrice:
        if sweep == "alpha":
            return asymptotic_price(opt, gp, float(value))
        return asymptotic_price(opt.with_(**{sweep: float(value)}), gp, alpha)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(evaluate, grid))
    else:
        rows = [evaluate(value) for value in grid]
    logger.info("Priced %d points along %s", len(rows), sweep)
    return rows


def curve_frame(rows: Sequence[AsymptoticPrice]) -> pd.DataFrame:
    return pd.DataFrame([row.to_row() for row in rows])


def sensitivity_curve(
    opt: OptionSpec, sigma_bar: float, sweep: str, values: Sequence[float]
) -> pd.DataFrame:
    """jump_sensitivity along a strike, maturity or spot grid."""
    if sweep == "alpha":
        raise UsageError("jump sensitivity does not depend on alpha")
    grid = _check_grid(values, sweep)
    return pd.DataFrame(
        {
            sweep: grid,
            "sensitivity": [
                jump_sensitivity(opt.with_(**{sweep: float(v)}), sigma_bar) for v in grid
            ],
        }
    )
