"""
Levy model representation: Merton parametrisation, tabulated atom measures and the
reduced (sigma_bar^2, m3, m4) group parameters.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad

from app import constants
from app.errors import ConvergenceError, ValidationError

logger = logging.getLogger(__name__)

Atoms = Tuple[Tuple[float, float], ...]


@dataclass(frozen=True)
class MertonParams:
    """
    Merton jump-diffusion X_t = mu t + sigma W_t + sum(e^{Y_i} - 1), Y ~ N(gamma_j, delta_j^2).
    """

    sigma: float
    lambda_m: float
    gamma_j: float
    delta_j: float
    mu: Optional[float] = None

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValidationError("must be >= 0", field_path="model.sigma")
        if not self.lambda_m >= 0:
            raise ValidationError("must be >= 0", field_path="model.lambda_m")
        if not self.delta_j > 0:
            raise ValidationError("must be > 0", field_path="model.delta_j")
        if not math.isfinite(self.gamma_j):
            raise ValidationError("must be finite", field_path="model.gamma_j")
        if self.sigma == 0 and self.lambda_m == 0:
            raise ValidationError("sigma and lambda_m cannot both vanish", field_path="model")

    @property
    def kappa(self) -> float:
        """Mean relative jump size E[e^Y - 1]."""
        return math.expm1(self.gamma_j + 0.5 * self.delta_j**2)

    @property
    def martingale_mu(self) -> float:
        return -self.lambda_m * self.kappa

    def with_martingale_drift(self) -> "MertonParams":
        return replace(self, mu=self.martingale_mu)


@dataclass(frozen=True)
class GroupParams:
    """The three reduced parameters driving the asymptotic price."""

    sigma_bar_sq: float
    m3: float
    m4: float

    def __post_init__(self):
        if not self.sigma_bar_sq > 0:
            raise ValidationError("must be > 0", field_path="group.sigma_bar_sq")
        # closed forms lose a few ulps to cancellation when jumps are tiny
        slack = 1e-12 * max(self.sigma_bar_sq**2, abs(self.m4) * self.sigma_bar_sq, self.m3**2)
        if self.m4 < -1e-12 * self.sigma_bar_sq:
            raise ValidationError("must be >= 0", field_path="group.m4")
        if self.m4 * self.sigma_bar_sq - self.m3**2 < -slack:
            raise ValidationError(
                "violates m4 * sigma_bar_sq >= m3^2", field_path="group.m4"
            )

    @property
    def sigma_bar(self) -> float:
        return math.sqrt(self.sigma_bar_sq)

    @property
    def model_factor(self) -> float:
        """m4 - m3^2 / sigma_bar^2, floored at zero."""
        return max(self.m4 - self.m3**2 / self.sigma_bar_sq, 0.0)


@dataclass(frozen=True)
class LevyModel:
    """
    Characteristic triplet (sigma, nu, gamma) against the truncation 1_{|x|<=1}.

    The measure is either MertonParams (density in jump size z, restricted to
    log-jumps within gamma_j +/- truncation_sd * delta_j and reweighted by e^{tilt z})
    or a tuple of (z_k, w_k) atoms.
    """

    sigma: float
    measure: Union[MertonParams, Atoms] = ()
    gamma: float = 0.0
    truncation_sd: float = constants.TRUNCATION_SD
    tilt: float = 0.0
    _support: Tuple[float, float] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValidationError("must be >= 0", field_path="model.sigma")
        if not self.truncation_sd > 0:
            raise ValidationError("must be > 0", field_path="model.truncation_sd")
        if self.is_merton:
            y_lo, y_hi = self.log_jump_range
            support = (math.expm1(y_lo), math.expm1(y_hi))
            if self.measure.lambda_m == 0:
                support = (0.0, 0.0)
        else:
            atoms = tuple((float(z), float(w)) for z, w in self.measure)
            for k, (z, w) in enumerate(atoms):
                if not z > -1:
                    raise ValidationError(f"jump size {z} must be > -1", f"model.atoms[{k}]")
                if not w >= 0:
                    raise ValidationError(f"mass {w} must be >= 0", f"model.atoms[{k}]")
            object.__setattr__(self, "measure", atoms)
            charged = [z for z, w in atoms if w > 0 and z != 0]
            support = (min(charged), max(charged)) if charged else (0.0, 0.0)
        object.__setattr__(self, "_support", support)

    @classmethod
    def from_merton(
        cls,
        params: MertonParams,
        martingale: bool = True,
        truncation_sd: float = constants.TRUNCATION_SD,
    ) -> "LevyModel":
        """
        Build the truncated Merton model; martingale=True solves for the drift,
        otherwise params.mu is used.
        """
        model = cls(sigma=params.sigma, measure=params, truncation_sd=truncation_sd)
        if martingale:
            return model.with_mean_drift(0.0)
        if params.mu is None:
            raise ValidationError("mu is required unless martingale=true", field_path="model.mu")
        small_jumps = model.integrate(lambda x: x, lower=-1.0, upper=1.0)
        return replace(model, gamma=params.mu + small_jumps)

    @classmethod
    def from_atoms(
        cls, atoms: Sequence[Tuple[float, float]], sigma: float, gamma: float = 0.0,
        martingale: bool = False,
    ) -> "LevyModel":
        model = cls(sigma=sigma, measure=tuple(tuple(a) for a in atoms), gamma=gamma)
        return model.with_mean_drift(0.0) if martingale else model

    @property
    def is_merton(self) -> bool:
        return isinstance(self.measure, MertonParams)

    @property
    def log_jump_range(self) -> Tuple[float, float]:
        p = self.measure
        half_width = self.truncation_sd * p.delta_j
        return p.gamma_j - half_width, p.gamma_j + half_width

    @property
    def support(self) -> Tuple[float, float]:
        """Smallest interval of jump sizes carrying mass ((0, 0) without jumps)."""
        return self._support

    @property
    def has_jumps(self) -> bool:
        return self._support != (0.0, 0.0)

    @property
    def large_jump_mean(self) -> float:
        """Integral of x over |x| > 1."""
        above = self.integrate(lambda x: x, lower=np.nextafter(1.0, 2.0))
        below = self.integrate(lambda x: x, upper=np.nextafter(-1.0, -2.0))
        return above + below

    @property
    def mean_drift(self) -> float:
        """E[X_1]: gamma plus the mean of the jumps excluded by the truncation."""
        return self.gamma + self.large_jump_mean

    def with_mean_drift(self, mean_drift: float) -> "LevyModel":
        return replace(self, gamma=mean_drift - self.large_jump_mean)

    def integrate(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        lower: float = -np.inf,
        upper: float = np.inf,
        epsrel: float = constants.QUAD_EPSREL,
    ) -> float:
        """
        Integral of func(x) nu(dx) over jump sizes in [lower, upper].

        Exact summation for atoms, adaptive quadrature in log-jump space for Merton.
        """
        if not self.is_merton:
            return float(
                sum(w * func(z) for z, w in self.measure if w > 0 and lower <= z <= upper)
            )

        p = self.measure
        if p.lambda_m == 0:
            return 0.0
        y_lo, y_hi = self.log_jump_range
        if lower > -1:
            y_lo = max(y_lo, math.log1p(lower))
        if upper < np.inf:
            if upper <= -1:
                return 0.0
            y_hi = min(y_hi, math.log1p(upper))
        if y_hi <= y_lo:
            return 0.0

        tilt = self.tilt
        scale = p.lambda_m / (p.delta_j * math.sqrt(2.0 * math.pi))
        inv_two_var = 1.0 / (2.0 * p.delta_j**2)

        def integrand(y):
            z = math.expm1(y)
            weight = scale * math.exp(-((y - p.gamma_j) ** 2) * inv_two_var)
            if tilt:
                weight *= math.exp(tilt * z)
            return weight * func(z)

        epsabs = 1e-15 * p.lambda_m
        value, abserr, info, *message = quad(
            integrand, y_lo, y_hi, epsabs=epsabs, epsrel=epsrel,
            limit=constants.QUAD_LIMIT, full_output=1,
        )
        required = max(epsabs, epsrel * abs(value))
        if abserr > required:
            logger.error(
                "Quadrature did not converge after %d subintervals: %s",
                info["last"], message[0] if message else "tolerance not met",
            )
            raise ConvergenceError("Levy measure quadrature", achieved=abserr, required=required)
        return value


def merton_levy_density(x, p: MertonParams):
    """Levy density of the Merton model in jump size x; zero for x <= -1."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x > -1, x, 0.0)
    log_jump = np.log1p(safe)
    density = (
        p.lambda_m
        / (p.delta_j * (safe + 1.0) * math.sqrt(2.0 * math.pi))
        * np.exp(-((log_jump - p.gamma_j) ** 2) / (2.0 * p.delta_j**2))
    )
    density = np.where(x > -1, density, 0.0)
    return float(density) if density.ndim == 0 else density


def group_params_merton(p: MertonParams) -> GroupParams:
    """Closed-form sigma_bar^2, m3 and m4 of the (untruncated) Merton measure."""
    g, d2 = p.gamma_j, p.delta_j**2
    e1 = math.exp(g + d2 / 2)
    e2 = math.exp(2 * g + 2 * d2)
    e3 = math.exp(3 * g + 9 * d2 / 2)
    e4 = math.exp(4 * g + 8 * d2)
    sigma_bar_sq = p.sigma**2 + p.lambda_m * (e2 - 2 * e1 + 1)
    m3 = p.lambda_m * (e3 - 3 * e2 + 3 * e1 - 1)
    m4 = p.lambda_m * (e4 - 4 * e3 + 6 * e2 - 4 * e1 + 1)
    return GroupParams(sigma_bar_sq=sigma_bar_sq, m3=m3, m4=m4)


def group_params_numeric(m: LevyModel) -> GroupParams:
    """Group parameters by quadrature (Merton, possibly tilted) or summation (atoms)."""
    second = m.integrate(lambda x: x * x)
    m3 = m.integrate(lambda x: x**3)
    m4 = m.integrate(lambda x: x**4)
    logger.debug("Numeric moments: second=%.12g m3=%.12g m4=%.12g", second, m3, m4)
    return GroupParams(sigma_bar_sq=m.sigma**2 + second, m3=m3, m4=m4)
