"""
Backward induction of the HJB scheme for a European put and the seller/buyer
indifference prices it yields.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd
from scipy.interpolate import PchipInterpolator

from app import constants
from app.bs_engine import OptionSpec
from app.errors import DomainError, GridRangeError, ValidationError
from app.levy_core import LevyModel, memm_model
from app.pide_solver.grid import PideGrid, discretize_levy
from app.pide_solver.scheme import advance

logger = logging.getLogger(__name__)

MEASURES = ("memm", "direct")


@dataclass(frozen=True)
class PideSolution:
    """
    values[i, j] = P(t_i, x_j) for t_i = i h, i = 0 .. n_time (last row is the pay-off).
    hedge[i, j] is the minimising theta at interior node j + 1 during the step into t_i.
    """

    option: OptionSpec
    grid: PideGrid
    measure: str
    values: np.ndarray
    hedge: np.ndarray
    iterations: np.ndarray
    max_residual: float
    clamped: bool

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.option.maturity, self.grid.n_time + 1)

    @property
    def diagnostics(self) -> dict:
        return {
            "mean_iterations": float(self.iterations.mean()),
            "max_iterations": int(self.iterations.max(initial=0)),
            "max_residual": self.max_residual,
            "clamped": self.clamped,
        }

    def price_at(self, spot: float) -> float:
        """Monotone cubic interpolation of the t = 0 row in log-spot."""
        if not spot > 0:
            raise ValidationError("must be > 0", field_path="option.spot")
        x = math.log(spot)
        if not self.x[1] <= x <= self.x[-2]:
            raise GridRangeError(
                f"log spot {x:.4f} outside the interior [{self.x[1]:.4f}, {self.x[-2]:.4f}]"
            )
        return float(PchipInterpolator(self.x, self.values[0])(x))

    def to_frame(self) -> pd.DataFrame:
        """Long table of the value surface and per-node hedges."""
        n_time, n_space = self.values.shape
        hedge = np.full((n_time, n_space), np.nan)
        hedge[:-1, 1:-1] = self.hedge
        times, x = np.meshgrid(self.times, self.x, indexing="ij")
        return pd.DataFrame(
            {
                "time": times.ravel(),
                "log_spot": x.ravel(),
                "spot": np.exp(x.ravel()),
                "value": self.values.ravel(),
                "hedge": hedge.ravel(),
            }
        )


class PideSolver:
    """
    Solves the put's HJB equation under the MEMM of `model` (measure="memm") or under
    `model` as given (measure="direct").
    """

    def __init__(self, opt: OptionSpec, model: LevyModel, grid: PideGrid, measure="memm"):
        if not opt.is_put:
            raise DomainError("the PIDE solver prices puts only")
        if measure not in MEASURES:
            raise ValidationError(f"must be one of {MEASURES}", field_path="model.measure")
        log_strike = math.log(opt.strike)
        if not grid.x0 < log_strike < grid.x[-1]:
            raise GridRangeError(
                f"log strike {log_strike:.4f} outside [{grid.x0:.4f}, {grid.x[-1]:.4f}]"
            )

        self.option = opt
        self.grid = grid
        self.measure = measure
        if measure == "memm":
            self.model = memm_model(model, grid.alpha)
        else:
            if abs(model.mean_drift) > constants.MEMM_DRIFT_TOLERANCE:
                logger.warning(
                    "Direct model has mean drift %.3e; the scheme imposes the martingale drift",
                    model.mean_drift,
                )
            self.model = model
        self.atoms = discretize_levy(self.model, grid)
        sigma_sq = self.model.sigma**2
        if grid.fold_center:
            sigma_sq += self.atoms.center_second_moment
        self.sigma = math.sqrt(sigma_sq)

    def payoff(self, x: np.ndarray, sign: float = 1.0) -> np.ndarray:
        return sign * np.maximum(self.option.strike - np.exp(x), 0.0)

    def solve(self, sign: float = 1.0) -> PideSolution:
        """Backward induction from the (signed) pay-off at T down to t = 0."""
        grid = self.grid
        h = grid.time_step(self.option.maturity)

        def extension(x):
            return self.payoff(x, sign)

        values = np.empty((grid.n_time + 1, grid.n_space))
        hedge = np.empty((grid.n_time, grid.n_space - 2))
        iterations = np.empty((grid.n_time, grid.n_space - 2), dtype=int)
        values[-1] = self.payoff(grid.x, sign)
        max_residual, clamped = 0.0, False
        for i in range(grid.n_time - 1, -1, -1):
            step = advance(values[i + 1], grid, self.atoms, self.sigma, h, extension)
            values[i] = step.values
            hedge[i] = step.hedge
            iterations[i] = step.iterations
            max_residual = max(max_residual, step.residual)
            clamped |= step.clamped
        if clamped:
            logger.warning("Exponent clamping was active during the solve")

        solution = PideSolution(
            option=self.option,
            grid=grid,
            measure=self.measure,
            values=values,
            hedge=hedge,
            iterations=iterations,
            max_residual=max_residual,
            clamped=clamped,
        )
        logger.info(
            "PIDE solve (sign %+g, alpha=%g): %s", sign, grid.alpha, solution.diagnostics
        )
        return solution

    def spread(self) -> Tuple[float, float, float]:
        """(seller, buyer, seller - buyer) at the option's spot."""
        spot = self.option.spot
        seller = self.solve(1.0).price_at(spot)
        buyer = -self.solve(-1.0).price_at(spot)
        spread = seller - buyer
        if spread < -1e-8:
            logger.warning("Negative indifference spread %.3e", spread)
        return seller, buyer, spread


def solve_pide(
    opt: OptionSpec, m: LevyModel, grid: PideGrid, measure: str = "memm"
) -> PideSolution:
    return PideSolver(opt, m, grid, measure).solve()


def indifference_spread_pide(
    opt: OptionSpec, m: LevyModel, grid: PideGrid, measure: str = "memm"
) -> Tuple[float, float, float]:
    """Seller price of +H, buyer price -p_s(-H) and their difference."""
    return PideSolver(opt, m, grid, measure).spread()
