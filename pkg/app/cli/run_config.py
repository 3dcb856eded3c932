"""
Typed run configuration built from the model/option/grid/run sections.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from app import constants
from app.bs_engine import OptionSpec
from app.errors import UsageError, ValidationError
from app.levy_core import (
    GroupParams,
    LevyModel,
    MertonParams,
    group_params_merton,
    group_params_numeric,
    memm_model,
)
from app.pide_solver import MEASURES, PideGrid

logger = logging.getLogger(__name__)

COMMANDS = ("price", "spread", "sensitivity", "selftest")
FORMATS = ("csv", "json", "pdf")
MODEL_KEYS = (
    "sigma", "lambda_m", "gamma_j", "delta_j", "mu", "martingale", "truncation_sd",
    "atoms", "gamma", "measure",
)
OPTION_KEYS = ("kind", "strike", "maturity", "spot")
GRID_KEYS = ("n_time", "m_half", "x0", "d", "k_half", "alpha", "tail_tolerance", "fold_center")
RUN_KEYS = (
    "command", "alpha_grid", "spot_grid", "strike_grid", "maturity_grid", "sigma_bar",
    "n_paths", "seed", "threads", "output", "format", "tolerance_scale", "include_pide",
    "surface_output",
)
GRID_SWEEPS = {
    "spot": "spot_grid",
    "alpha": "alpha_grid",
    "strike": "strike_grid",
    "maturity": "maturity_grid",
}

DEFAULT_N_PATHS = 200_000
DEFAULT_SEED = 42


def _check_keys(section: str, values: dict, allowed: Sequence[str]) -> None:
    unknown = sorted(set(values) - set(allowed))
    if unknown:
        raise ValidationError(f"unknown keys {unknown}", field_path=section)


def _number(section: str, key: str, value: Any, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"must be a number, got {value!r}", field_path=f"{section}.{key}")
    if integer:
        if int(value) != value:
            raise ValidationError("must be an integer", field_path=f"{section}.{key}")
        return int(value)
    if not math.isfinite(value):
        raise ValidationError("must be finite", field_path=f"{section}.{key}")
    return float(value)


def _flag(section: str, key: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ValidationError(f"must be true or false, got {value!r}", f"{section}.{key}")
    return value


def _grid(key: str, value: Any) -> Optional[Tuple[float, ...]]:
    if value is None:
        return None
    if not isinstance(value, (list, tuple)):
        raise ValidationError("must be a list of numbers", field_path=f"run.{key}")
    return tuple(_number("run", f"{key}[{i}]", v) for i, v in enumerate(value))


def build_model(section: dict) -> LevyModel:
    """Merton model unless `atoms` is given; martingale drift by default."""
    _check_keys("model", section, MODEL_KEYS)
    martingale = _flag("model", "martingale", section.get("martingale", True))
    sigma = _number("model", "sigma", section.get("sigma", constants.REFERENCE_MERTON["sigma"]))

    if "atoms" in section:
        atoms = section["atoms"]
        if not isinstance(atoms, list) or not all(
            isinstance(a, (list, tuple)) and len(a) == 2 for a in atoms
        ):
            raise ValidationError("must be a list of [z, w] pairs", field_path="model.atoms")
        pairs = [
            (_number("model", f"atoms[{i}][0]", z), _number("model", f"atoms[{i}][1]", w))
            for i, (z, w) in enumerate(atoms)
        ]
        gamma = _number("model", "gamma", section.get("gamma", 0.0))
        return LevyModel.from_atoms(pairs, sigma=sigma, gamma=gamma, martingale=martingale)

    params = {
        key: _number("model", key, section.get(key, default))
        for key, default in constants.REFERENCE_MERTON.items()
        if key != "sigma"
    }
    mu = section.get("mu")
    merton = MertonParams(
        sigma=sigma, mu=None if mu is None else _number("model", "mu", mu), **params
    )
    truncation_sd = _number(
        "model", "truncation_sd", section.get("truncation_sd", constants.TRUNCATION_SD)
    )
    return LevyModel.from_merton(merton, martingale=martingale, truncation_sd=truncation_sd)


def build_option(section: dict) -> OptionSpec:
    _check_keys("option", section, OPTION_KEYS)
    values = dict(constants.REFERENCE_OPTION)
    values.update(section)
    return OptionSpec(
        kind=values["kind"],
        strike=_number("option", "strike", values["strike"]),
        maturity=_number("option", "maturity", values["maturity"]),
        spot=_number("option", "spot", values["spot"]),
    )


def build_grid(section: dict) -> PideGrid:
    _check_keys("grid", section, GRID_KEYS)
    values = dict(constants.REFERENCE_GRID, alpha=constants.REFERENCE_ALPHA)
    values.update(section)
    return PideGrid(
        n_time=_number("grid", "n_time", values["n_time"], integer=True),
        m_half=_number("grid", "m_half", values["m_half"], integer=True),
        x0=_number("grid", "x0", values["x0"]),
        d=_number("grid", "d", values["d"]),
        k_half=_number("grid", "k_half", values["k_half"], integer=True),
        alpha=_number("grid", "alpha", values["alpha"]),
        tail_tolerance=_number(
            "grid", "tail_tolerance", values.get("tail_tolerance", constants.TAIL_TOLERANCE)
        ),
        fold_center=_flag("grid", "fold_center", values.get("fold_center", False)),
    )


@dataclass(frozen=True)
class RunSection:
    command: Optional[str] = None
    alpha_grid: Optional[Tuple[float, ...]] = None
    spot_grid: Optional[Tuple[float, ...]] = None
    strike_grid: Optional[Tuple[float, ...]] = None
    maturity_grid: Optional[Tuple[float, ...]] = None
    sigma_bar: Optional[float] = None
    n_paths: int = DEFAULT_N_PATHS
    seed: int = DEFAULT_SEED
    threads: Optional[int] = None
    output: Optional[str] = None
    surface_output: Optional[str] = None
    format: str = "csv"
    tolerance_scale: float = 1.0
    include_pide: bool = True

    def __post_init__(self):
        if self.command is not None and self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if self.format not in FORMATS:
            raise ValidationError(f"must be one of {FORMATS}", field_path="run.format")
        if self.threads is not None and self.threads < 1:
            raise ValidationError("must be >= 1", field_path="run.threads")
        if not self.tolerance_scale >= 0:
            raise ValidationError("must be >= 0", field_path="run.tolerance_scale")
        if self.sigma_bar is not None and not self.sigma_bar > 0:
            raise ValidationError("must be > 0", field_path="run.sigma_bar")
        for key in GRID_SWEEPS.values():
            grid = getattr(self, key)
            if grid is not None and len(grid) == 0:
                raise UsageError(f"run.{key} must not be empty")

    @classmethod
    def from_section(cls, section: dict) -> "RunSection":
        _check_keys("run", section, RUN_KEYS)
        values: Dict[str, Any] = {}
        for key in GRID_SWEEPS.values():
            values[key] = _grid(key, section.get(key))
        for key in ("n_paths", "seed", "threads"):
            if section.get(key) is not None:
                values[key] = _number("run", key, section[key], integer=True)
        for key in ("sigma_bar", "tolerance_scale"):
            if section.get(key) is not None:
                values[key] = _number("run", key, section[key])
        if "include_pide" in section:
            values["include_pide"] = _flag("run", "include_pide", section["include_pide"])
        for key in ("command", "output", "surface_output", "format"):
            if section.get(key) is not None:
                values[key] = str(section[key])
        return cls(**values)

    def sweep(self) -> Tuple[str, Optional[Tuple[float, ...]]]:
        """First configured grid in spot, alpha, strike, maturity order."""
        for name, key in GRID_SWEEPS.items():
            if getattr(self, key) is not None:
                return name, getattr(self, key)
        return "spot", None


@dataclass(frozen=True)
class RunConfig:
    model: LevyModel
    measure: str
    option: OptionSpec
    grid: PideGrid
    run: RunSection = field(default_factory=RunSection)

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValidationError(f"must be one of {MEASURES}", field_path="model.measure")

    @classmethod
    def from_dict(cls, config: dict) -> "RunConfig":
        model_section = dict(config.get("model") or {})
        measure = model_section.pop("measure", "memm")
        return cls(
            model=build_model(model_section),
            measure=measure,
            option=build_option(config.get("option") or {}),
            grid=build_grid(config.get("grid") or {}),
            run=RunSection.from_section(config.get("run") or {}),
        )

    def with_run(self, **changes) -> "RunConfig":
        return replace(self, run=replace(self.run, **changes))

    @cached_property
    def pricing_model(self) -> LevyModel:
        """
        The martingale model prices are computed under. The MEMM tilt u* does not
        depend on alpha, so any positive alpha gives the same measure.
        """
        if self.measure == "direct":
            return self.model
        return memm_model(self.model, 1.0)

    @cached_property
    def group_params(self) -> GroupParams:
        m = self.pricing_model
        if m.is_merton and m.tilt == 0:
            return group_params_merton(m.measure)
        return group_params_numeric(m)

    @property
    def sigma_bar(self) -> float:
        return self.run.sigma_bar or self.group_params.sigma_bar

    def grid_values(self, key: str) -> np.ndarray:
        """Configured grid for a sweep key, or the single configured value."""
        values = getattr(self.run, GRID_SWEEPS[key])
        if values is not None:
            return np.asarray(values, dtype=float)
        default = self.grid.alpha if key == "alpha" else getattr(self.option, key)
        return np.array([default], dtype=float)
