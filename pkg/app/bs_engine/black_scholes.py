"""
Zero-rate Black-Scholes prices and cash greeks d_n = s^n d^n P / ds^n up to order 6.
"""

import logging
import math
from math import comb, factorial

import numpy as np
from scipy.stats import norm

from app.bs_engine.options import BsContext, OptionSpec
from app.errors import DomainError

logger = logging.getLogger(__name__)

MAX_GREEK_ORDER = 6


def _scalar_or_array(values: np.ndarray):
    return float(values) if np.ndim(values) == 0 else values


def d_plus(opt: OptionSpec, ctx: BsContext, s):
    """delta_1(t, s) = (log(s/K) + vol^2 tau / 2) / (vol sqrt(tau))."""
    tau = ctx.tau(opt)
    vol_sqrt_tau = ctx.vol * math.sqrt(tau)
    log_moneyness = np.log(np.asarray(s, dtype=float) / opt.strike)
    return (log_moneyness + 0.5 * vol_sqrt_tau**2) / vol_sqrt_tau


def bs_price(opt: OptionSpec, ctx: BsContext, s):
    """Call s Phi(delta_1) - K Phi(delta_2); put by parity put = call - s + K."""
    s = np.asarray(s, dtype=float)
    tau = ctx.tau(opt)
    delta_1 = d_plus(opt, ctx, s)
    delta_2 = delta_1 - ctx.vol * math.sqrt(tau)
    call = s * norm.cdf(delta_1) - opt.strike * norm.cdf(delta_2)
    price = call if not opt.is_put else call - s + opt.strike
    return _scalar_or_array(price)


def recurrence_coefficient(k: int, delta, vol_sq_tau: float):
    """D_k = (-1)^{k+1} k! [delta - H_k / (vol^2 tau)], H_k the k-th harmonic number."""
    harmonic = sum(1.0 / p for p in range(1, k + 1))
    return (-1) ** (k + 1) * factorial(k) * (delta - harmonic / vol_sq_tau)


def cash_greeks(opt: OptionSpec, ctx: BsContext, s, n_max: int) -> np.ndarray:
    """
    Cash greeks d_1 ... d_{n_max} stacked along the first axis.

    d_1 and d_2 are explicit; higher orders follow
    d_{3+n} = sum_{k=0}^{n} C(n, k) D_{n-k} d_{2+k}.
    Put and call share every greek of order >= 2.
    """
    if not 1 <= n_max <= MAX_GREEK_ORDER:
        raise DomainError(f"greek order must lie in [1, {MAX_GREEK_ORDER}], got {n_max}")
    s = np.asarray(s, dtype=float)
    tau = ctx.tau(opt)
    vol_sqrt_tau = ctx.vol * math.sqrt(tau)
    vol_sq_tau = vol_sqrt_tau**2

    delta_1 = d_plus(opt, ctx, s)
    d1 = s * norm.cdf(delta_1)
    if opt.is_put:
        d1 = d1 - s
    greeks = [d1, s * norm.pdf(delta_1) / vol_sqrt_tau]

    delta = delta_1 / vol_sqrt_tau + 1.0
    coefficients = [recurrence_coefficient(k, delta, vol_sq_tau) for k in range(n_max - 2)]
    for n in range(n_max - 2):
        # greeks[1 + k] holds d_{2+k}
        greeks.append(
            sum(comb(n, k) * coefficients[n - k] * greeks[1 + k] for k in range(n + 1))
        )
    return np.stack(greeks[:n_max])
