"""
Monte Carlo linear price E*[H] from exact terminal-law sampling of a finite-activity
martingale model: Gaussian diffusion plus a compound Poisson sum of log-jumps.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Tuple

import numpy as np

from app import constants
from app.bs_engine import OptionSpec
from app.errors import DomainError, ValidationError
from app.levy_core import LevyModel
from app.oracles.report import OracleReport

logger = logging.getLogger(__name__)


class TerminalSampler:
    """Draws log S_T / S_0 = -sigma^2 T/2 - T int z nu(dz) + sigma W_T + sum log(1 + z_i)."""

    def __init__(self, m: LevyModel, maturity: float):
        if abs(m.mean_drift) > constants.MEMM_DRIFT_TOLERANCE:
            raise DomainError(f"model drift {m.mean_drift:.3e} is not a martingale drift")
        if m.is_merton and m.tilt:
            raise DomainError("exact sampling is available for untilted Merton and atom models")
        self.model = m
        self.maturity = maturity
        compensator = m.integrate(lambda x: x) if m.has_jumps else 0.0
        self.drift = (-0.5 * m.sigma**2 - compensator) * maturity
        self.volatility = m.sigma * math.sqrt(maturity)
        if m.is_merton:
            self.intensity = m.measure.lambda_m
        else:
            masses = np.array([w for _, w in m.measure])
            self.intensity = float(masses.sum())
            self.log_jumps = np.log1p(np.array([z for z, _ in m.measure]))
            self.probabilities = masses / self.intensity if self.intensity else masses

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        x = self.drift + self.volatility * rng.standard_normal(size)
        if self.intensity == 0:
            return x
        counts = rng.poisson(self.intensity * self.maturity, size)
        if self.model.is_merton:
            p = self.model.measure
            x += counts * p.gamma_j + np.sqrt(counts) * p.delta_j * rng.standard_normal(size)
        else:
            per_atom = rng.multinomial(counts, self.probabilities)
            x += per_atom @ self.log_jumps
        return x


def _batch_moments(
    opt: OptionSpec, sampler: TerminalSampler, seed: np.random.SeedSequence, size: int
) -> Tuple[float, float]:
    rng = np.random.default_rng(seed)
    payoff = opt.payoff(opt.spot * np.exp(sampler.sample(rng, size)))
    return float(payoff.sum()), float(np.square(payoff).sum())


def mc_linear_price(
    opt: OptionSpec,
    m: LevyModel,
    n_paths: int,
    seed: int,
    threads: Optional[int] = None,
) -> OracleReport:
    """
    Sample mean of the pay-off with its standard error. Batches get child seeds of
    SeedSequence(seed), so the result does not depend on `threads`.
    """
    if n_paths < constants.MIN_MC_PATHS:
        raise ValidationError(f"must be >= {constants.MIN_MC_PATHS}", field_path="run.n_paths")
    sampler = TerminalSampler(m, opt.maturity)

    batch = constants.MC_BATCH_SIZE
    sizes = [batch] * (n_paths // batch) + ([n_paths % batch] if n_paths % batch else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(args):
        return _batch_moments(opt, sampler, *args)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            moments = list(pool.map(run, zip(children, sizes)))
    else:
        moments = [run(args) for args in zip(children, sizes)]

    total = sum(s for s, _ in moments)
    total_sq = sum(q for _, q in moments)
    mean = total / n_paths
    variance = max(total_sq / n_paths - mean**2, 0.0) * n_paths / (n_paths - 1)
    error = math.sqrt(variance / n_paths)
    logger.info(
        "Monte Carlo %s: %.8g +/- %.2e (%d paths, seed %d)", opt, mean, error, n_paths, seed
    )
    return OracleReport(value=mean, method="monte-carlo", error_estimate=error, seed=seed)
