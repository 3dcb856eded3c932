"""
Minimal entropy martingale measure: the cumulant-type function l(u), its minimiser
u* = -alpha * phi*, and the exponential tilt of the Levy measure.
"""

import logging
import math
from dataclasses import replace

import numpy as np

from app import constants
from app.errors import ConsistencyError, ConvergenceError, DomainError, ValidationError
from app.levy_core.models import LevyModel

logger = logging.getLogger(__name__)


def _exp_residual(z: float) -> float:
    """e^z - 1 - z without cancellation near zero."""
    if abs(z) < 1e-3:
        return z * z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)))
    return math.expm1(z) - z


def ell(u: float, m: LevyModel) -> float:
    """l(u) = E[X_1] u + sigma^2 u^2 / 2 + int (e^{ux} - 1 - ux) nu(dx)."""
    if u == 0:
        return 0.0
    jumps = m.integrate(lambda x: _exp_residual(u * x)) if m.has_jumps else 0.0
    return m.mean_drift * u + 0.5 * m.sigma**2 * u * u + jumps


def ell_prime(u: float, m: LevyModel) -> float:
    jumps = m.integrate(lambda x: x * math.expm1(u * x)) if m.has_jumps and u else 0.0
    return m.mean_drift + m.sigma**2 * u + jumps


def ell_second(u: float, m: LevyModel) -> float:
    jumps = m.integrate(lambda x: x * x * math.exp(u * x)) if m.has_jumps else 0.0
    return m.sigma**2 + jumps


def is_monotone(m: LevyModel) -> bool:
    """True when X is a.s. monotone, i.e. l has no interior minimum."""
    if m.sigma > 0:
        return False
    if not m.has_jumps:
        return True
    lower, upper = m.support
    if lower < 0 < upper:
        return False
    # one-sided finite-activity jumps: the uncompensated drift must point the other way
    drift = m.mean_drift - m.integrate(lambda x: x)
    if upper <= 0:
        return not drift > 0
    return not drift < 0


def _bracket(m: LevyModel, g0: float):
    """Doubling search from u = 0 for [lo, hi] with l'(lo) <= 0 <= l'(hi)."""
    direction = -1.0 if g0 > 0 else 1.0
    step = 1.0
    for _ in range(constants.BRACKET_MAX_DOUBLINGS):
        u = direction * step
        g = ell_prime(u, m)
        if (direction < 0 and g <= 0) or (direction > 0 and g >= 0):
            return (u, 0.0) if direction < 0 else (0.0, u)
        step *= 2.0
    raise ConvergenceError("no sign change of l' found", achieved=abs(g), required=0.0)


def find_memm_tilt(m: LevyModel, alpha: float) -> float:
    """
    Return phi* such that l(-alpha phi*) = inf_u l(u).

    Safeguarded Newton on the increasing function l', bracketed by a doubling search
    from u = 0 and falling back to bisection whenever a step leaves the bracket.
    """
    if not alpha > 0:
        raise ValidationError("must be > 0", field_path="grid.alpha")
    if is_monotone(m):
        raise DomainError("model is a.s. monotone: l has no interior minimum")

    u = 0.0
    g = ell_prime(u, m)
    curvature = ell_second(u, m)
    if abs(g) <= constants.MEMM_TOLERANCE * (1.0 + curvature):
        logger.debug("MEMM tilt: model already a martingale (l'(0) = %.3e)", g)
        return 0.0

    lo, hi = _bracket(m, g)
    for iteration in range(1, constants.MEMM_MAX_ITER + 1):
        candidate = u - g / curvature if curvature > 0 else np.nan
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        u = candidate
        g = ell_prime(u, m)
        curvature = ell_second(u, m)
        if abs(g) <= constants.MEMM_TOLERANCE * (1.0 + curvature):
            phi_star = -u / alpha
            logger.debug("MEMM tilt converged in %d iterations: u*=%.12g", iteration, u)
            return phi_star
        if g > 0:
            hi = u
        else:
            lo = u
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(u)):
            break

    required = constants.MEMM_TOLERANCE * (1.0 + curvature)
    logger.error("MEMM tilt search failed: l'(%.6g) = %.3e", u, g)
    raise ConvergenceError("MEMM tilt search", achieved=abs(g), required=required)


def tilt_measure(m: LevyModel, alpha: float, phi_star: float) -> LevyModel:
    """
    Model under the MEMM: nu*(dx) = e^{-alpha phi* x} nu(dx), same sigma, drift such
    that the tilted process is a martingale.
    """
    u = -alpha * phi_star
    residual = ell_prime(u, m)
    if abs(residual) > constants.MEMM_DRIFT_TOLERANCE:
        logger.error("Tilted drift residual %.3e exceeds tolerance", residual)
        raise ConsistencyError(
            f"martingale drift residual {residual:.3e} above {constants.MEMM_DRIFT_TOLERANCE}"
        )

    if u == 0:
        tilted = m
    elif m.is_merton:
        tilted = replace(m, tilt=m.tilt + u)
    else:
        tilted = replace(m, measure=tuple((z, w * math.exp(u * z)) for z, w in m.measure))
    return tilted.with_mean_drift(0.0)


def memm_model(m: LevyModel, alpha: float) -> LevyModel:
    """Tilt a physical-measure model to its MEMM."""
    phi_star = find_memm_tilt(m, alpha)
    logger.info("MEMM tilt phi*=%.12g (alpha=%g)", phi_star, alpha)
    return tilt_measure(m, alpha, phi_star)
