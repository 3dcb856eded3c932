"""
The four commands. Each takes a RunConfig and returns a PriceReport; all arithmetic
is delegated to the pricing packages.
"""

import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd

from app import constants
from app.asym_pricer import (
    asymptotic_quote,
    bid_ask_spread,
    price_curve,
    sensitivity_curve,
    spread_decomposition,
)
from app.bs_engine import BsContext, OptionSpec, bs_price, cash_greeks, put_gamma_integral
from app.cli.reports import PriceReport, write_surface
from app.cli.run_config import GRID_SWEEPS, RunConfig
from app.levy_core import LevyModel, MertonParams
from app.oracles import fd_greeks, jump_sensitivity_numeric, mc_linear_price, merton_series_price
from app.pide_solver import PideGrid, PideSolution, indifference_spread_pide, solve_pide

logger = logging.getLogger(__name__)

# the PIDE needs alpha > 0; alpha = 0 rows use this risk-neutral limit instead
MIN_PIDE_ALPHA = 1e-8


def _pide_grid(cfg: RunConfig, alpha: float) -> PideGrid:
    return replace(cfg.grid, alpha=max(alpha, MIN_PIDE_ALPHA))


def _dump_surfaces(solutions: Dict[Tuple[float, float, float], PideSolution], out: str) -> None:
    if not solutions:
        logger.warning("No PIDE solve in this run; surface output %s not written", out)
        return
    frames = [
        solution.to_frame().assign(strike=strike, maturity=maturity, alpha=alpha)
        for (strike, maturity, alpha), solution in solutions.items()
    ]
    write_surface(pd.concat(frames, ignore_index=True), out)


def cmd_price(cfg: RunConfig) -> PriceReport:
    """Asymptotic breakdown along the configured sweep, next to the PIDE price for puts."""
    sweep, _ = cfg.run.sweep()
    rows = price_curve(
        cfg.option, cfg.group_params, cfg.grid.alpha, sweep, cfg.grid_values(sweep),
        threads=cfg.run.threads,
    )
    include_pide = cfg.run.include_pide and cfg.option.is_put
    solutions: Dict[Tuple[float, float, float], PideSolution] = {}

    def pide_price(opt: OptionSpec, alpha: float) -> float:
        key = (opt.strike, opt.maturity, alpha)
        if key not in solutions:
            solutions[key] = solve_pide(opt, cfg.model, _pide_grid(cfg, alpha), cfg.measure)
        return solutions[key].price_at(opt.spot)

    records = []
    for row in rows:
        opt = row.option
        pide = pide_price(opt, row.alpha) if include_pide else math.nan
        records.append(
            {
                "S0": opt.spot,
                "K": opt.strike,
                "T": opt.maturity,
                "alpha": row.alpha,
                "bs": row.bs_term,
                "m3_term": row.m3_term,
                "m4_term": row.m4_term,
                "m3sq_term": row.m3sq_term,
                "nonlinear": row.nonlinear_term,
                "linear": row.linear,
                "asymptotic": row.total,
                "pide": pide,
                "abs_gap": row.total - pide,
                "rel_gap": (row.total - pide) / pide if pide else math.nan,
            }
        )
    if cfg.run.surface_output:
        _dump_surfaces(solutions, cfg.run.surface_output)
    return PriceReport(
        command="price",
        table=pd.DataFrame.from_records(records),
        measure=cfg.measure,
        outside_hypotheses=not cfg.option.is_put,
        metadata={"sweep": sweep, "kind": cfg.option.kind},
    )


def cmd_spread(cfg: RunConfig) -> PriceReport:
    """Closed-form and PIDE bid-ask spreads, one row per risk aversion."""
    opt, gp = cfg.option, cfg.group_params
    include_pide = cfg.run.include_pide and opt.is_put
    records = []
    for alpha in cfg.grid_values("alpha"):
        alpha = float(alpha)
        quote = asymptotic_quote(opt, gp, alpha)
        parts = spread_decomposition(opt, gp, alpha)
        record = {
            "alpha": alpha,
            "model_factor": parts.model_factor,
            "option_factor": parts.option_factor,
            "spread_closed_form": bid_ask_spread(opt, gp, alpha),
            "seller_asymptotic": quote.seller,
            "buyer_asymptotic": quote.buyer,
            "seller_pide": math.nan,
            "buyer_pide": math.nan,
            "spread_pide": math.nan,
            "relative_spread_pide": math.nan,
        }
        if include_pide:
            seller, buyer, spread = indifference_spread_pide(
                opt, cfg.model, _pide_grid(cfg, alpha), cfg.measure
            )
            record.update(
                seller_pide=seller,
                buyer_pide=buyer,
                spread_pide=spread,
                relative_spread_pide=spread / seller if seller else math.nan,
            )
        records.append(record)
    return PriceReport(
        command="spread",
        table=pd.DataFrame.from_records(records),
        measure=cfg.measure,
        outside_hypotheses=not opt.is_put,
    )


def cmd_sensitivity(cfg: RunConfig) -> PriceReport:
    """Jump-risk sensitivity along the strike and maturity grids."""
    sigma_bar = cfg.sigma_bar
    sweeps = [
        key for key in ("strike", "maturity") if getattr(cfg.run, GRID_SWEEPS[key]) is not None
    ] or ["strike"]
    frames = []
    for key in sweeps:
        curve = sensitivity_curve(cfg.option, sigma_bar, key, cfg.grid_values(key))
        frames.append(
            pd.DataFrame({"sweep": key, "point": curve[key], "sensitivity": curve["sensitivity"]})
        )
    return PriceReport(
        command="sensitivity",
        table=pd.concat(frames, ignore_index=True),
        metadata={"sigma_bar": sigma_bar},
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    achieved: float
    required: float
    seconds: float

    @property
    def passed(self) -> bool:
        return bool(self.achieved <= self.required)


def _check_greeks(cfg: RunConfig) -> float:
    """Worst relative finite-difference error, in units of that order's tolerance."""
    opt = OptionSpec(**constants.REFERENCE_OPTION)
    ctx = BsContext(vol=constants.REFERENCE_MERTON["sigma"])
    greeks = cash_greeks(opt, ctx, opt.spot, 6)
    ratios = [
        abs(fd_greeks(opt, ctx, opt.spot, n).value - greeks[n - 1])
        / abs(greeks[n - 1])
        / tolerance
        for n, tolerance in constants.FD_GREEK_TOLERANCES.items()
    ]
    return max(ratios)


def _check_gamma_integral(cfg: RunConfig) -> float:
    sigma_bar = constants.REFERENCE_MERTON["sigma"]
    errors = []
    for strike in (0.8, 1.0, 1.25):
        for maturity in (0.5, 1.0, 2.0):
            opt = OptionSpec(kind="put", strike=strike, maturity=maturity, spot=1.0)
            closed = put_gamma_integral(opt, sigma_bar)
            errors.append(abs(jump_sensitivity_numeric(opt, sigma_bar).value - closed) / closed)
    return max(errors)


def _merton_martingale(cfg: RunConfig) -> Tuple[LevyModel, MertonParams]:
    m = cfg.pricing_model
    if m.is_merton and m.tilt == 0:
        return m, m.measure.with_martingale_drift()
    params = MertonParams(**constants.REFERENCE_MERTON).with_martingale_drift()
    return LevyModel.from_merton(params), params


def _check_series_vs_monte_carlo(cfg: RunConfig) -> float:
    """Distance between the two linear prices in Monte Carlo standard errors."""
    model, params = _merton_martingale(cfg)
    series = merton_series_price(cfg.option, params)
    mc = mc_linear_price(
        cfg.option, model, cfg.run.n_paths, cfg.run.seed, threads=cfg.run.threads
    )
    return abs(series.value - mc.value) / mc.error_estimate


def _check_pide_black_scholes(cfg: RunConfig) -> float:
    opt = OptionSpec(**constants.REFERENCE_OPTION)
    sigma = constants.REFERENCE_MERTON["sigma"]
    solution = solve_pide(opt, LevyModel(sigma=sigma), cfg.grid, measure="direct")
    return abs(solution.price_at(opt.spot) - bs_price(opt, BsContext(vol=sigma), opt.spot))


def _check_newton_iterations(cfg: RunConfig) -> float:
    opt = cfg.option.with_(kind="put")
    solution = solve_pide(opt, cfg.model, cfg.grid, cfg.measure)
    return solution.diagnostics["mean_iterations"]


SELFTEST_CHECKS: List[Tuple[str, Callable[[RunConfig], float], float]] = [
    ("greeks_vs_finite_differences_scaled", _check_greeks, 1.0),
    ("gamma_integral_vs_quadrature", _check_gamma_integral, 1e-6),
    ("series_vs_monte_carlo_std_errors", _check_series_vs_monte_carlo, 3.0),
    ("pide_black_scholes_limit", _check_pide_black_scholes, 5e-4),
    ("pide_mean_newton_iterations", _check_newton_iterations, 6.0),
]


def cmd_selftest(cfg: RunConfig) -> PriceReport:
    """Run every cross-check; `run.tolerance_scale` multiplies each required tolerance."""
    results = []
    for name, check, required in SELFTEST_CHECKS:
        start = time.perf_counter()
        achieved = check(cfg)
        result = CheckResult(
            name=name,
            achieved=float(achieved),
            required=required * cfg.run.tolerance_scale,
            seconds=time.perf_counter() - start,
        )
        logger.info(
            "selftest %s: achieved %.3e, required %.3e, %s (%.2fs)",
            name, result.achieved, result.required,
            "pass" if result.passed else "FAIL", result.seconds,
        )
        results.append(result)

    table = pd.DataFrame(
        {
            "check": [r.name for r in results],
            "achieved": [r.achieved for r in results],
            "required": [r.required for r in results],
            "passed": [r.passed for r in results],
        }
    )
    passed = bool(np.all(table["passed"]))
    seconds = {r.name: round(r.seconds, 3) for r in results}
    return PriceReport(
        command="selftest", table=table, metadata={"passed": passed, "seconds": seconds}
    )


COMMAND_HANDLERS: Dict[str, Callable[[RunConfig], PriceReport]] = {
    "price": cmd_price,
    "spread": cmd_spread,
    "sensitivity": cmd_sensitivity,
    "selftest": cmd_selftest,
}
