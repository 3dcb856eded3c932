"""
Space/time/jump discretisation of the HJB integro-differential equation in x = log S.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from app import constants
from app.errors import GridRangeError, ValidationError
from app.levy_core import LevyModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PideGrid:
    """
    Nodes x_j = x0 + j d for j = 0 .. 2 m_half, time step h = T / n_time, jump atoms
    at k d for k = -k_half .. k_half, and the risk aversion alpha.
    """

    n_time: int
    m_half: int
    x0: float
    d: float
    k_half: int
    alpha: float
    tail_tolerance: float = constants.TAIL_TOLERANCE
    fold_center: bool = False

    def __post_init__(self):
        for name, minimum in (("n_time", 1), ("m_half", 2), ("k_half", 1)):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < minimum:
                raise ValidationError(f"must be an integer >= {minimum}", f"grid.{name}")
        if self.k_half > self.m_half:
            raise ValidationError("must not exceed grid.m_half", field_path="grid.k_half")
        if not self.d > 0:
            raise ValidationError("must be > 0", field_path="grid.d")
        if not math.isfinite(self.x0):
            raise ValidationError("must be finite", field_path="grid.x0")
        if not self.alpha > 0:
            raise ValidationError("must be > 0", field_path="grid.alpha")
        if not self.tail_tolerance >= 0:
            raise ValidationError("must be >= 0", field_path="grid.tail_tolerance")

    @classmethod
    def reference(cls, alpha: float = constants.REFERENCE_ALPHA, **overrides) -> "PideGrid":
        """N = 40 time steps, 2M = 200 space steps, 2K = 100 jump cells on [-2, 2]."""
        fields = dict(constants.REFERENCE_GRID, alpha=alpha)
        fields.update(overrides)
        return cls(**fields)

    def refined(self, factor: int = 2) -> "PideGrid":
        """Same domain and jump range with h and d divided by factor."""
        return PideGrid(
            n_time=self.n_time * factor,
            m_half=self.m_half * factor,
            x0=self.x0,
            d=self.d / factor,
            k_half=self.k_half * factor,
            alpha=self.alpha,
            tail_tolerance=self.tail_tolerance,
            fold_center=self.fold_center,
        )

    @property
    def n_space(self) -> int:
        return 2 * self.m_half + 1

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.d * np.arange(self.n_space)

    @property
    def k(self) -> np.ndarray:
        return np.arange(-self.k_half, self.k_half + 1)

    def time_step(self, maturity: float) -> float:
        return maturity / self.n_time


@dataclass(frozen=True)
class LevyAtoms:
    """
    Masses of the log-jump measure at k d, k = -k_half .. k_half (index k + k_half).

    The centre cell is discarded from `masses`; its mass and log-jump second moment are
    kept for diagnostics and optional folding into the diffusion.
    """

    masses: np.ndarray
    center_mass: float = 0.0
    center_second_moment: float = 0.0

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=float)
        if masses.ndim != 1 or masses.size % 2 == 0:
            raise ValidationError("must be a 1-d array of odd length", field_path="atoms.masses")
        if np.any(masses < 0):
            raise ValidationError("must be >= 0", field_path="atoms.masses")
        if masses[masses.size // 2] != 0:
            raise ValidationError("centre mass must be 0", field_path="atoms.masses")
        object.__setattr__(self, "masses", masses)

    @property
    def k_half(self) -> int:
        return self.masses.size // 2

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def jump_factors(self, d: float) -> np.ndarray:
        """e^{k d} - 1 for every atom."""
        return np.expm1(d * np.arange(-self.k_half, self.k_half + 1))


def _merton_cells(model: LevyModel, edges: np.ndarray):
    """Cell masses, total mass and centre second moment of the truncated log-jump law."""
    p = model.measure
    y_lo, y_hi = model.log_jump_range
    lower = np.clip(edges[:-1], y_lo, y_hi)
    upper = np.clip(edges[1:], y_lo, y_hi)
    centre = edges.size // 2 - 1

    def density(y):
        value = p.lambda_m * norm.pdf(y, loc=p.gamma_j, scale=p.delta_j)
        return value * math.exp(model.tilt * math.expm1(y)) if model.tilt else value

    if model.tilt:
        masses = np.array(
            [quad(density, a, b)[0] if b > a else 0.0 for a, b in zip(lower, upper)]
        )
        total = model.integrate(lambda x: 1.0)
    else:
        cdf = norm.cdf(np.concatenate([lower, upper[-1:]]), loc=p.gamma_j, scale=p.delta_j)
        masses = p.lambda_m * np.diff(cdf)
        total = p.lambda_m * (
            norm.cdf(y_hi, loc=p.gamma_j, scale=p.delta_j)
            - norm.cdf(y_lo, loc=p.gamma_j, scale=p.delta_j)
        )
    a, b = lower[centre], upper[centre]
    second = quad(lambda y: y * y * density(y), a, b)[0] if b > a else 0.0
    return masses, total, second


def _atom_cells(model: LevyModel, grid: PideGrid):
    masses = np.zeros(2 * grid.k_half + 1)
    total = second = 0.0
    for z, w in model.measure:
        total += w
        y = math.log1p(z)
        k = math.ceil(y / grid.d - 0.5)
        if k == 0:
            second += w * y * y
        if abs(k) <= grid.k_half:
            masses[k + grid.k_half] += w
    return masses, total, second


def discretize_levy(m: LevyModel, grid: PideGrid) -> LevyAtoms:
    """
    Push the Levy measure forward to log-jumps and integrate it over the cells
    ((k - 1/2) d, (k + 1/2) d]; the k = 0 cell is set aside.
    """
    if not m.has_jumps:
        return LevyAtoms(masses=np.zeros(2 * grid.k_half + 1))

    if m.is_merton:
        edges = (np.arange(-grid.k_half, grid.k_half + 2) - 0.5) * grid.d
        masses, total, second = _merton_cells(m, edges)
    else:
        masses, total, second = _atom_cells(m, grid)

    tail = total - masses.sum()
    if tail > grid.tail_tolerance * total:
        logger.error("Levy tail mass %.3e lies beyond k_half=%d", tail, grid.k_half)
        raise GridRangeError(
            f"Levy mass {tail:.3e} lies beyond +/-{grid.k_half} d; increase grid.k_half"
        )

    centre = grid.k_half
    center_mass = float(masses[centre])
    masses[centre] = 0.0
    logger.debug(
        "Discretised Levy measure: %d atoms, total %.10g, centre mass %.3e",
        masses.size, masses.sum(), center_mass,
    )
    return LevyAtoms(masses=masses, center_mass=center_mass, center_second_moment=second)
