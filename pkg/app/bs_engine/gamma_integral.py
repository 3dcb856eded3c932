"""
Closed form of E^BS[ int_0^T (S_t^2 d^2P/dS^2)^2 dt ] for a European put.

    K^2 / (2 pi sigma_bar^2) * int_0^1 exp(-d^2 / (1 + u)) / sqrt(1 - u^2) du

with d = (log(S0/K) - sigma_bar^2 T / 2) / (sigma_bar sqrt(T)). The substitution
u = sin(theta) removes the endpoint singularity.
"""

import logging
import math

import numpy as np

from app import constants
from app.bs_engine.options import OptionSpec
from app.errors import ConvergenceError, DomainError, ValidationError
from app.quadrature import composite_gauss_legendre

logger = logging.getLogger(__name__)


def _theta_integral(d_sq: float, panels: int) -> float:
    theta, weights = composite_gauss_legendre(
        0.0, 0.5 * math.pi, constants.GAUSS_LEGENDRE_NODES, panels
    )
    return float(np.dot(weights, np.exp(-d_sq / (1.0 + np.sin(theta)))))


def gamma_integral(strike: float, spot: float, maturity: float, sigma_bar: float) -> float:
    """
    Shared put/call value of the squared cash-gamma expectation.

    One 64-node panel is checked against two; if they disagree a single refinement to
    four panels is made and must agree with the two-panel value.
    """
    if not sigma_bar > 0:
        raise ValidationError("must be > 0", field_path="sigma_bar")
    d = (math.log(spot / strike) - 0.5 * sigma_bar**2 * maturity) / (
        sigma_bar * math.sqrt(maturity)
    )
    d_sq = d * d
    tolerance = constants.GAMMA_INTEGRAL_TOLERANCE

    coarse = _theta_integral(d_sq, 1)
    fine = _theta_integral(d_sq, 2)
    if abs(fine - coarse) > tolerance * abs(fine):
        logger.debug("Gamma integral refinement pass (d=%.6g)", d)
        coarse, fine = fine, _theta_integral(d_sq, 4)
        if abs(fine - coarse) > 1e2 * tolerance * abs(fine):
            raise ConvergenceError(
                "gamma integral quadrature",
                achieved=abs(fine - coarse) / abs(fine),
                required=1e2 * tolerance,
            )
    return strike**2 / (2.0 * math.pi * sigma_bar**2) * fine


def put_gamma_integral(opt: OptionSpec, sigma_bar: float) -> float:
    """E^BS[ int_0^T (S_t^2 P_BS''(t, S_t))^2 dt ] for the put `opt` at volatility sigma_bar."""
    if not opt.is_put:
        raise DomainError("put_gamma_integral requires a put; use jump_sensitivity for calls")
    return gamma_integral(opt.strike, opt.spot, opt.maturity, sigma_bar)
