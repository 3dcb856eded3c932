"""
One backward step of the implicit-explicit scheme: diffusion implicit, jumps and the
hedging Hamiltonian explicit in the next-time row.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from app import constants
from app.errors import ConsistencyError, ConvergenceError
from app.pide_solver.grid import LevyAtoms, PideGrid
from app.pide_solver.tridiag import solve_tridiagonal

logger = logging.getLogger(__name__)

Extension = Callable[[np.ndarray], np.ndarray]


def extend_row(p_next: np.ndarray, grid: PideGrid, extension: Optional[Extension] = None):
    """
    Pad a space row by k_half nodes on each side so every jump neighbour is defined.

    `extension` maps log-prices beyond the grid to values; without one the end values
    are repeated.
    """
    p_next = np.asarray(p_next, dtype=float)
    if p_next.size != grid.n_space:
        raise ConsistencyError(f"row has {p_next.size} nodes, grid has {grid.n_space}")
    if extension is None:
        return np.pad(p_next, grid.k_half, mode="edge")
    offsets = grid.d * np.arange(1, grid.k_half + 1)
    left = extension(grid.x0 - offsets[::-1])
    right = extension(grid.x[-1] + offsets)
    return np.concatenate([left, p_next, right])


def _exp_residual(y: np.ndarray) -> np.ndarray:
    series = y * y * (0.5 + y * (1.0 / 6.0 + y * (1.0 / 24.0 + y / 120.0)))
    return np.where(np.abs(y) < 1e-3, series, np.expm1(y) - y)


@dataclass
class _Stencil:
    """Jump differences and central deltas of a set of nodes, restricted to live atoms."""

    alpha: float
    sigma_sq: float
    delta: np.ndarray
    dp: np.ndarray
    c: np.ndarray
    nu: np.ndarray

    @property
    def degenerate(self) -> bool:
        return self.sigma_sq == 0 and self.nu.size == 0

    def _exponent(self, theta: np.ndarray) -> Tuple[np.ndarray, bool]:
        y = self.alpha * (self.dp - np.outer(theta, self.c))
        bound = constants.EXPONENT_CLAMP
        clamped = bool(np.any(np.abs(y) > bound))
        return np.clip(y, -bound, bound), clamped

    def value(self, theta: np.ndarray) -> Tuple[np.ndarray, bool]:
        y, clamped = self._exponent(theta)
        diffusion = 0.5 * self.alpha * self.sigma_sq * (theta - self.delta) ** 2
        return diffusion + _exp_residual(y) @ self.nu / self.alpha, clamped

    def gradient(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        y, _ = self._exponent(theta)
        g = self.alpha * self.sigma_sq * (theta - self.delta) - np.expm1(y) @ (self.c * self.nu)
        curvature = self.alpha * (self.sigma_sq + np.exp(y) @ (self.c * self.c * self.nu))
        return g, curvature

    def jump_drift(self) -> np.ndarray:
        """B_j = sum_k (dP_k - (e^{kd} - 1) delta_j) nu_k."""
        return self.dp @ self.nu - self.delta * float(self.c @ self.nu)

    def quadratic_ratio(self) -> np.ndarray:
        numerator = self.sigma_sq * self.delta + self.dp @ (self.c * self.nu)
        denominator = self.sigma_sq + float(self.c * self.c @ self.nu)
        if denominator == 0:
            return self.delta.copy()
        return numerator / denominator


def _stencil(nodes, p_next, grid, atoms, sigma, extension=None) -> _Stencil:
    nodes = np.atleast_1d(np.asarray(nodes, dtype=int))
    if np.any(nodes < 0) or np.any(nodes >= grid.n_space):
        raise ConsistencyError(f"node index outside 0..{grid.n_space - 1}")
    if atoms.k_half != grid.k_half:
        raise ConsistencyError("atoms and grid disagree on k_half")
    padded = extend_row(p_next, grid, extension)
    centre = padded[nodes + grid.k_half]
    windows = sliding_window_view(padded, 2 * grid.k_half + 1)[nodes]
    delta = (padded[nodes + grid.k_half + 1] - padded[nodes + grid.k_half - 1]) / (2 * grid.d)

    live = atoms.masses > 0
    return _Stencil(
        alpha=grid.alpha,
        sigma_sq=sigma**2,
        delta=delta,
        dp=windows[:, live] - centre[:, None],
        c=atoms.jump_factors(grid.d)[live],
        nu=atoms.masses[live],
    )


@dataclass(frozen=True)
class Minimum:
    theta: np.ndarray
    value: np.ndarray
    iterations: np.ndarray
    residual: float
    clamped: bool


def _bracket(st: _Stencil, g0: np.ndarray):
    """Doubling search from the central delta for lo <= theta* <= hi at every node."""
    lo = np.where(g0 > 0, -np.inf, st.delta)
    hi = np.where(g0 > 0, st.delta, np.inf)
    step = 1.0
    for _ in range(constants.BRACKET_MAX_DOUBLINGS):
        need_lo, need_hi = np.isinf(lo), np.isinf(hi)
        if not (need_lo.any() or need_hi.any()):
            return lo, hi
        trial = np.where(need_lo, st.delta - step, st.delta + step)
        g, _ = st.gradient(trial)
        lo = np.where(need_lo & (g <= 0), trial, lo)
        hi = np.where(need_lo & (g > 0), trial, hi)
        hi = np.where(need_hi & (g >= 0), trial, hi)
        lo = np.where(need_hi & (g < 0), trial, lo)
        step *= 2.0
    raise ConvergenceError(
        "no sign change of dH/dtheta found", achieved=float(np.max(np.abs(g0)))
    )


def _minimize(st: _Stencil) -> Minimum:
    """Safeguarded Newton on dH/dtheta for all nodes at once, bisection inside the bracket."""
    n = st.delta.size
    theta = st.delta.copy()
    iterations = np.zeros(n, dtype=int)
    if st.degenerate:
        return Minimum(theta, np.zeros(n), iterations, 0.0, False)

    # dH/dtheta scales with alpha
    tolerance = constants.HAMILTONIAN_TOLERANCE * min(1.0, st.alpha)
    g, curvature = st.gradient(theta)
    h, clamped = st.value(theta)
    done = np.abs(g) <= tolerance * (1.0 + np.abs(h))
    if not done.all():
        lo, hi = _bracket(st, g)
    for _ in range(constants.HAMILTONIAN_MAX_ITER):
        active = ~done
        if not active.any():
            break
        candidate = theta - g / curvature
        outside = ~((candidate > lo) & (candidate < hi))
        candidate = np.where(outside, 0.5 * (lo + hi), candidate)
        theta = np.where(active, candidate, theta)
        g, curvature = st.gradient(theta)
        h, hit = st.value(theta)
        clamped |= hit
        iterations += active
        done |= np.abs(g) <= tolerance * (1.0 + np.abs(h))
        lo = np.where(active & (g <= 0), theta, lo)
        hi = np.where(active & (g > 0), theta, hi)
        done |= hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(theta))

    residual = float(np.max(np.abs(g)))
    if not done.all():
        worst = float(np.max(np.abs(g[~done])))
        logger.error("Hamiltonian minimisation stalled at %d nodes", int((~done).sum()))
        raise ConvergenceError(
            "Hamiltonian minimisation hit the iteration cap",
            achieved=worst,
            required=tolerance,
        )
    return Minimum(theta, h, iterations, residual, clamped)


def hamiltonian(
    j: int,
    p_next: np.ndarray,
    theta: float,
    grid: PideGrid,
    atoms: LevyAtoms,
    sigma: float,
    extension: Optional[Extension] = None,
) -> float:
    """
    H_j(P, theta) = (alpha sigma^2 / 2)(theta - delta_j)^2
                    + (1/alpha) sum_k (e^{y_k} - 1 - y_k) nu_k,
    y_k = alpha (dP_k - (e^{kd} - 1) theta).
    """
    st = _stencil(j, p_next, grid, atoms, sigma, extension)
    value, clamped = st.value(np.array([theta], dtype=float))
    if clamped:
        logger.warning("Hamiltonian exponent clamped at node %d", j)
    return float(value[0])


def minimize_hamiltonian(
    j: int,
    p_next: np.ndarray,
    grid: PideGrid,
    atoms: LevyAtoms,
    sigma: float,
    extension: Optional[Extension] = None,
) -> Tuple[float, float]:
    """(theta*, min_theta H_j); (delta_j, 0) when sigma = 0 and there are no atoms."""
    found = _minimize(_stencil(j, p_next, grid, atoms, sigma, extension))
    return float(found.theta[0]), float(found.value[0])


def quadratic_hedge_ratio(
    j: int,
    p_next: np.ndarray,
    grid: PideGrid,
    atoms: LevyAtoms,
    sigma: float,
    extension: Optional[Extension] = None,
) -> float:
    """
    Small risk-aversion limit of theta*:
    (sigma^2 delta_j + sum_k (e^{kd} - 1) dP_k nu_k) / (sigma^2 + sum_k (e^{kd} - 1)^2 nu_k).
    """
    return float(_stencil(j, p_next, grid, atoms, sigma, extension).quadratic_ratio()[0])


@dataclass(frozen=True)
class StepResult:
    values: np.ndarray
    hedge: np.ndarray
    iterations: np.ndarray
    residual: float
    clamped: bool


def advance(
    p_next: np.ndarray,
    grid: PideGrid,
    atoms: LevyAtoms,
    sigma: float,
    h: float,
    extension: Optional[Extension] = None,
) -> StepResult:
    """P_{i+1} -> P_i with minimiser diagnostics; boundary nodes are copied from p_next."""
    p_next = np.asarray(p_next, dtype=float)
    s2h = sigma**2 * h
    second, first = s2h / (2 * grid.d**2), s2h / (4 * grid.d)
    if sigma > 0 and not second > first:
        raise ConsistencyError(f"scheme is not diagonally dominant for d={grid.d} (needs d < 2)")

    interior = np.arange(1, grid.n_space - 1)
    st = _stencil(interior, p_next, grid, atoms, sigma, extension)
    found = _minimize(st)

    rhs = p_next[interior] + h * st.jump_drift() + h * found.value
    rhs[0] += (second + first) * p_next[0]
    rhs[-1] += (second - first) * p_next[-1]
    n = interior.size
    solved = solve_tridiagonal(
        lower=np.full(n, -(second + first)),
        diag=np.full(n, 1.0 + 2.0 * second),
        upper=np.full(n, -(second - first)),
        rhs=rhs,
    )
    values = np.concatenate([p_next[:1], solved, p_next[-1:]])
    return StepResult(values, found.theta, found.iterations, found.residual, found.clamped)


def step_backward(
    p_next: np.ndarray,
    grid: PideGrid,
    atoms: LevyAtoms,
    sigma: float,
    h: float,
    extension: Optional[Extension] = None,
) -> np.ndarray:
    """One time step of the scheme; returns the new space row."""
    return advance(p_next, grid, atoms, sigma, h, extension).values
