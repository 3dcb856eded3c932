import math

import assertpy
import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from app.asym_pricer import asymptotic_price
from app.bs_engine import BsContext, bs_price
from app.errors import ConsistencyError, DomainError, GridRangeError, ValidationError
from app.levy_core import LevyModel, group_params_merton
from app.oracles import merton_series_price
from app.pide_solver import (
    LevyAtoms,
    PideGrid,
    PideSolver,
    advance,
    discretize_levy,
    hamiltonian,
    indifference_spread_pide,
    minimize_hamiltonian,
    quadratic_hedge_ratio,
    solve_pide,
    solve_tridiagonal,
    step_backward,
)
from app.pide_solver.scheme import extend_row
from app.tests.conftest import ALPHA, LAMBDA_M, REFERENCE_SELLER_PRICE, SIGMA, SPOT

SMALL_GRID = {"n_time": 10, "m_half": 20, "x0": -0.4, "d": 0.02, "k_half": 5}


def _small_grid(alpha: float = 2.0, **overrides) -> PideGrid:
    return PideGrid(**dict(SMALL_GRID, alpha=alpha, **overrides))


def _atoms(grid: PideGrid, placed=None) -> LevyAtoms:
    masses = np.zeros(2 * grid.k_half + 1)
    for k, w in (placed or {}).items():
        masses[k + grid.k_half] = w
    return LevyAtoms(masses=masses)


def _row(grid: PideGrid, seed: int = 3) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.maximum(1.0 - np.exp(grid.x), 0.0) + 0.01 * rng.standard_normal(grid.n_space)


def test_reference_grid(reference_grid):
    assertpy.assert_that(reference_grid.n_space).is_equal_to(201)
    assertpy.assert_that(reference_grid.x[-1]).is_close_to(2.0, 1e-12)
    assertpy.assert_that(reference_grid.x[100]).is_close_to(0.0, 1e-12)
    assertpy.assert_that(reference_grid.time_step(1.0)).is_equal_to(0.025)
    assertpy.assert_that(reference_grid.k.size).is_equal_to(101)


def test_refined_grid(reference_grid):
    fine = reference_grid.refined()
    assertpy.assert_that(fine.n_time).is_equal_to(80)
    assertpy.assert_that(fine.d).is_equal_to(0.01)
    assertpy.assert_that(fine.x[-1]).is_close_to(reference_grid.x[-1], 1e-12)
    jump_range = reference_grid.k_half * reference_grid.d
    assertpy.assert_that(fine.k_half * fine.d).is_close_to(jump_range, 1e-15)


@pytest.mark.parametrize(
    "overrides",
    [{"k_half": 30}, {"d": 0.0}, {"n_time": 0}, {"alpha": 0.0}, {"m_half": 2.5}],
)
def test_grid_validation(overrides):
    with pytest.raises(ValidationError):
        _small_grid(**overrides)


def test_levy_atoms_validation():
    with pytest.raises(ValidationError):
        LevyAtoms(masses=np.zeros(4))
    with pytest.raises(ValidationError):
        LevyAtoms(masses=np.array([0.1, 0.0, -0.1]))
    with pytest.raises(ValidationError):
        LevyAtoms(masses=np.array([0.1, 0.2, 0.1]))


def test_discretize_without_jumps(reference_grid, black_scholes_model):
    atoms = discretize_levy(black_scholes_model, reference_grid)
    assertpy.assert_that(atoms.total).is_equal_to(0.0)
    assertpy.assert_that(atoms.k_half).is_equal_to(reference_grid.k_half)


def test_discretize_atom_on_a_node():
    grid = _small_grid()
    model = LevyModel.from_atoms([(math.expm1(3 * grid.d), 0.7)], sigma=SIGMA)
    atoms = discretize_levy(model, grid)
    assertpy.assert_that(atoms.masses[grid.k_half + 3]).is_equal_to(0.7)
    assertpy.assert_that(atoms.total).is_equal_to(0.7)


def test_discretize_atom_beyond_range():
    grid = _small_grid()
    model = LevyModel.from_atoms([(0.5, 1.0)], sigma=SIGMA)
    with pytest.raises(GridRangeError):
        discretize_levy(model, grid)


def test_discretize_merton_moments(merton_params, merton_model, reference_grid):
    atoms = discretize_levy(merton_model, reference_grid)
    total = atoms.total + atoms.center_mass
    assertpy.assert_that(total).is_close_to(LAMBDA_M, 1e-6)
    log_jumps = reference_grid.k * reference_grid.d
    second = float(np.dot(atoms.masses, log_jumps**2)) + atoms.center_second_moment
    expected = LAMBDA_M * (merton_params.gamma_j**2 + merton_params.delta_j**2)
    assertpy.assert_that(second).is_close_to(expected, 0.01 * expected)
    assertpy.assert_that(atoms.masses[reference_grid.k_half]).is_equal_to(0.0)


def test_discretize_merton_tail_beyond_jump_range(merton_model):
    narrow = PideGrid.reference(k_half=5)
    with pytest.raises(GridRangeError):
        discretize_levy(merton_model, narrow)


def test_extend_row_uses_extension():
    grid = _small_grid()
    row = _row(grid)
    padded = extend_row(row, grid, lambda x: np.maximum(1.0 - np.exp(x), 0.0))
    assertpy.assert_that(padded.size).is_equal_to(grid.n_space + 2 * grid.k_half)
    outermost = 1.0 - math.exp(grid.x0 - grid.k_half * grid.d)
    assertpy.assert_that(padded[0]).is_close_to(outermost, 1e-12)
    np.testing.assert_array_equal(padded[grid.k_half : -grid.k_half], row)
    edge = extend_row(row, grid)
    assertpy.assert_that(edge[0]).is_equal_to(row[0])
    with pytest.raises(ConsistencyError):
        extend_row(row[:-1], grid)


def test_hamiltonian_without_jumps():
    grid = _small_grid(alpha=ALPHA)
    row = _row(grid)
    atoms = _atoms(grid)
    j = 20
    delta = (row[j + 1] - row[j - 1]) / (2 * grid.d)
    assertpy.assert_that(hamiltonian(j, row, delta, grid, atoms, SIGMA)).is_equal_to(0.0)
    away = hamiltonian(j, row, delta + 1.0, grid, atoms, SIGMA)
    assertpy.assert_that(away).is_close_to(0.5 * ALPHA * SIGMA**2, 1e-12)


def test_hamiltonian_single_atom_by_hand():
    grid = _small_grid(alpha=2.0)
    row = _row(grid)
    atoms = _atoms(grid, {2: 0.5})
    j, theta = 20, 0.3
    delta = (row[j + 1] - row[j - 1]) / (2 * grid.d)
    y = grid.alpha * (row[j + 2] - row[j] - math.expm1(2 * grid.d) * theta)
    expected = 0.5 * grid.alpha * SIGMA**2 * (theta - delta) ** 2 + 0.5 * (
        math.expm1(y) - y
    ) / grid.alpha
    value = hamiltonian(j, row, theta, grid, atoms, SIGMA)
    assertpy.assert_that(value).is_close_to(expected, 1e-12)


def test_minimum_without_jumps_is_delta_hedge():
    grid = _small_grid()
    row = _row(grid)
    j = 15
    delta = (row[j + 1] - row[j - 1]) / (2 * grid.d)
    theta, value = minimize_hamiltonian(j, row, grid, _atoms(grid), SIGMA)
    assertpy.assert_that(theta).is_equal_to(delta)
    assertpy.assert_that(value).is_equal_to(0.0)
    theta, value = minimize_hamiltonian(j, row, grid, _atoms(grid), 0.0)
    assertpy.assert_that(theta).is_equal_to(delta)
    assertpy.assert_that(value).is_equal_to(0.0)


def test_minimum_matches_bounded_search():
    grid = _small_grid(alpha=5.0)
    row = _row(grid, seed=11)
    atoms = _atoms(grid, {-4: 0.8, -1: 2.0, 3: 1.2})
    for j in (8, 20, 33):
        theta, value = minimize_hamiltonian(j, row, grid, atoms, SIGMA)
        result = minimize_scalar(
            lambda t: hamiltonian(j, row, t, grid, atoms, SIGMA),
            bounds=(theta - 5.0, theta + 5.0),
            method="bounded",
            options={"xatol": 1e-10},
        )
        assertpy.assert_that(theta).is_close_to(result.x, 1e-5)
        assertpy.assert_that(value).is_less_than_or_equal_to(result.fun + 1e-12)
        assertpy.assert_that(value).is_greater_than_or_equal_to(0.0)
        delta = (row[j + 1] - row[j - 1]) / (2 * grid.d)
        at_delta = hamiltonian(j, row, delta, grid, atoms, SIGMA)
        assertpy.assert_that(value).is_less_than_or_equal_to(at_delta)


def test_small_risk_aversion_gives_quadratic_hedge():
    grid = _small_grid(alpha=1e-8)
    row = _row(grid, seed=5)
    atoms = _atoms(grid, {-3: 1.5, 2: 1.0})
    for j in (10, 20, 30):
        theta, _ = minimize_hamiltonian(j, row, grid, atoms, SIGMA)
        ratio = quadratic_hedge_ratio(j, row, grid, atoms, SIGMA)
        assertpy.assert_that(theta).is_close_to(ratio, 1e-6 * max(1.0, abs(ratio)))


def test_tridiagonal_matches_dense_solve():
    rng = np.random.default_rng(0)
    n = 25
    lower, upper = rng.uniform(-1, 0, n), rng.uniform(-1, 0, n)
    diag = 2.5 + rng.uniform(0, 1, n)
    rhs = rng.standard_normal(n)
    dense = np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)
    np.testing.assert_allclose(
        solve_tridiagonal(lower, diag, upper, rhs), np.linalg.solve(dense, rhs), atol=1e-12
    )
    with pytest.raises(ConsistencyError):
        solve_tridiagonal(lower[:-1], diag, upper, rhs)


def test_step_without_jumps_matches_dense_solve():
    grid = _small_grid()
    row = _row(grid)
    h = 0.025
    second, first = SIGMA**2 * h / (2 * grid.d**2), SIGMA**2 * h / (4 * grid.d)
    n = grid.n_space - 2
    dense = (
        np.diag(np.full(n, 1 + 2 * second))
        + np.diag(np.full(n - 1, -(second + first)), -1)
        + np.diag(np.full(n - 1, -(second - first)), 1)
    )
    rhs = row[1:-1].copy()
    rhs[0] += (second + first) * row[0]
    rhs[-1] += (second - first) * row[-1]
    values = step_backward(row, grid, _atoms(grid), SIGMA, h)
    np.testing.assert_allclose(values[1:-1], np.linalg.solve(dense, rhs), atol=1e-12)
    assertpy.assert_that(values[0]).is_equal_to(row[0])
    assertpy.assert_that(values[-1]).is_equal_to(row[-1])


def test_step_keeps_constants_and_identity():
    grid = _small_grid()
    constant = np.full(grid.n_space, 0.3)
    values = step_backward(constant, grid, _atoms(grid), SIGMA, 0.025)
    np.testing.assert_allclose(values, constant, atol=1e-14)
    row = _row(grid)
    np.testing.assert_array_equal(step_backward(row, grid, _atoms(grid), 0.0, 0.025), row)


def test_step_without_jumps_ignores_risk_aversion():
    row = _row(_small_grid())
    low = step_backward(row, _small_grid(alpha=1.0), _atoms(_small_grid()), SIGMA, 0.025)
    high = step_backward(row, _small_grid(alpha=10.0), _atoms(_small_grid()), SIGMA, 0.025)
    np.testing.assert_allclose(low, high, atol=1e-12)


def test_step_reports_diagnostics():
    grid = _small_grid(alpha=5.0)
    row = _row(grid)
    step = advance(row, grid, _atoms(grid, {-2: 1.0, 2: 1.0}), SIGMA, 0.025)
    assertpy.assert_that(step.hedge.shape).is_equal_to((grid.n_space - 2,))
    assertpy.assert_that(step.iterations.shape).is_equal_to((grid.n_space - 2,))
    assertpy.assert_that(step.clamped).is_false()


def test_step_requires_diagonal_dominance():
    grid = _small_grid(d=2.5, x0=-50.0)
    with pytest.raises(ConsistencyError):
        step_backward(np.zeros(grid.n_space), grid, _atoms(grid), SIGMA, 0.025)


def test_solver_rejects_bad_inputs(atm_put, atm_call, merton_model, reference_grid):
    with pytest.raises(DomainError):
        PideSolver(atm_call, merton_model, reference_grid)
    with pytest.raises(ValidationError):
        PideSolver(atm_put, merton_model, reference_grid, measure="physical")
    with pytest.raises(GridRangeError):
        PideSolver(atm_put.with_(strike=10.0), merton_model, reference_grid)


def test_solution_layout(atm_put, merton_model, reference_grid):
    solution = solve_pide(atm_put, merton_model, reference_grid)
    n_time, n_space = reference_grid.n_time, reference_grid.n_space
    payoff = np.maximum(1.0 - np.exp(reference_grid.x), 0.0)
    assertpy.assert_that(solution.values.shape).is_equal_to((n_time + 1, n_space))
    assertpy.assert_that(solution.hedge.shape).is_equal_to((n_time, n_space - 2))
    np.testing.assert_array_equal(solution.values[-1], payoff)
    np.testing.assert_array_equal(solution.values[:, 0], np.full(n_time + 1, payoff[0]))
    np.testing.assert_array_equal(solution.values[:, -1], np.full(n_time + 1, payoff[-1]))
    assertpy.assert_that(solution.times[-1]).is_equal_to(1.0)
    assertpy.assert_that(solution.diagnostics["clamped"]).is_false()
    assertpy.assert_that(len(solution.to_frame())).is_equal_to((n_time + 1) * n_space)


def test_price_at_range(atm_put, merton_model, reference_grid):
    solution = solve_pide(atm_put, merton_model, reference_grid)
    assertpy.assert_that(solution.price_at(SPOT)).is_close_to(solution.values[0, 100], 1e-14)
    with pytest.raises(GridRangeError):
        solution.price_at(100.0)
    with pytest.raises(ValidationError):
        solution.price_at(0.0)


def test_black_scholes_limit_converges(atm_put, black_scholes_model, reference_grid):
    exact = bs_price(atm_put, BsContext(vol=SIGMA), SPOT)
    coarse = solve_pide(atm_put, black_scholes_model, reference_grid).price_at(SPOT)
    fine = solve_pide(atm_put, black_scholes_model, reference_grid.refined()).price_at(SPOT)
    assertpy.assert_that(abs(coarse - exact)).is_less_than(5e-4)
    assertpy.assert_that(abs(coarse - exact)).is_greater_than_or_equal_to(1.5 * abs(fine - exact))


def test_seller_dominates_buyer(atm_put, merton_model):
    seller, buyer, spread = indifference_spread_pide(
        atm_put, merton_model, PideGrid.reference(alpha=ALPHA)
    )
    assertpy.assert_that(spread).is_close_to(seller - buyer, 1e-15)
    assertpy.assert_that(seller).is_greater_than(buyer)


@pytest.mark.slow
def test_reference_asymptotic_agrees_with_pide(atm_put, merton_params, merton_model):
    gp = group_params_merton(merton_params)
    for alpha in (1.0, 5.0, ALPHA):
        pide = solve_pide(atm_put, merton_model, PideGrid.reference(alpha=alpha)).price_at(SPOT)
        asymptotic = asymptotic_price(atm_put, gp, alpha).total
        assertpy.assert_that(abs(asymptotic - pide)).is_less_than_or_equal_to(0.02 * pide)


@pytest.mark.slow
def test_reference_relative_spread(atm_put, merton_model):
    seller, _, spread = indifference_spread_pide(
        atm_put, merton_model, PideGrid.reference(alpha=ALPHA)
    )
    assertpy.assert_that(spread / seller).is_between(0.04, 0.08)


@pytest.mark.slow
def test_seller_price_increases_with_risk_aversion(atm_put, merton_model):
    prices = [
        solve_pide(atm_put, merton_model, PideGrid.reference(alpha=alpha)).price_at(SPOT)
        for alpha in (0.01, 1.0, 5.0, 10.0)
    ]
    assertpy.assert_that(bool(np.all(np.diff(prices) > 0))).is_true()


@pytest.mark.slow
def test_small_risk_aversion_gives_linear_price(atm_put, merton_params, merton_model):
    series = merton_series_price(atm_put, merton_params.with_martingale_drift())
    pide = solve_pide(atm_put, merton_model, PideGrid.reference(alpha=1e-4)).price_at(SPOT)
    assertpy.assert_that(pide).is_close_to(series.value, 0.01 * series.value)


@pytest.mark.slow
def test_reference_seller_price(atm_put, merton_model, reference_grid):
    pide = solve_pide(atm_put, merton_model, reference_grid).price_at(SPOT)
    assertpy.assert_that(pide).is_close_to(REFERENCE_SELLER_PRICE, 0.01 * REFERENCE_SELLER_PRICE)
