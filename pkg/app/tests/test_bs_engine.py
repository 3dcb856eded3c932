import math

import assertpy
import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from app.bs_engine import (
    BsContext,
    OptionSpec,
    bs_price,
    cash_greeks,
    gamma_integral,
    put_gamma_integral,
)
from app.bs_engine.black_scholes import d_plus
from app.errors import DomainError, ValidationError
from app.quadrature import composite_gauss_legendre, gauss_hermite, gauss_legendre
from app.tests.conftest import SIGMA, SIGMA_BAR_SQ, STRIKE

CASES = [(1.0, 1.0, 0.2), (1.3, 0.5, 0.35), (0.8, 2.0, 0.15)]


def _integrated_put(opt: OptionSpec, vol: float) -> float:
    """E[(K - S_T)^+] with S_T lognormal, integrated below the exercise boundary."""
    variance = vol**2 * opt.maturity
    z_star = (math.log(opt.strike / opt.spot) + 0.5 * variance) / math.sqrt(variance)

    def integrand(z):
        terminal = opt.spot * math.exp(-0.5 * variance + math.sqrt(variance) * z)
        return (opt.strike - terminal) * norm.pdf(z)

    value, _ = quad(integrand, -np.inf, z_star, epsabs=1e-14, epsrel=1e-13, limit=200)
    return value


def _explicit_greeks(opt: OptionSpec, ctx: BsContext, s: np.ndarray):
    tau = opt.maturity - ctx.t
    v = ctx.vol**2 * tau
    delta = d_plus(opt, ctx, s) / math.sqrt(v) + 1.0
    d2 = s * norm.pdf(d_plus(opt, ctx, s)) / math.sqrt(v)
    d3 = -d2 * delta
    d4 = d2 * (delta - 1 / v) - d3 * delta
    d5 = -d2 * (2 * delta - 3 / v) + 2 * d3 * (delta - 1 / v) - d4 * delta
    d6 = (
        d2 * (6 * delta - 11 / v)
        - 3 * d3 * (2 * delta - 3 / v)
        + 3 * d4 * (delta - 1 / v)
        - d5 * delta
    )
    return np.stack([d2, d3, d4, d5, d6])


def test_option_validation():
    with pytest.raises(ValidationError):
        OptionSpec(kind="straddle", strike=1.0, maturity=1.0, spot=1.0)
    with pytest.raises(ValidationError) as error:
        OptionSpec(kind="put", strike=-1.0, maturity=1.0, spot=1.0)
    assertpy.assert_that(error.value.field_path).is_equal_to("option.strike")


def test_context_validation(atm_put):
    with pytest.raises(ValidationError):
        BsContext(vol=0.0)
    with pytest.raises(DomainError):
        BsContext(vol=SIGMA, t=1.0).tau(atm_put)


def test_payoff(atm_put, atm_call):
    assertpy.assert_that(atm_put.payoff(0.75)).is_equal_to(0.25)
    assertpy.assert_that(atm_call.payoff(0.75)).is_equal_to(0.0)
    assertpy.assert_that(list(atm_call.payoff([1.5, 2.0]))).is_equal_to([0.5, 1.0])


@pytest.mark.parametrize("strike,maturity,vol", CASES)
def test_put_price_matches_integrated_payoff(strike, maturity, vol):
    for spot in (0.7, 1.0, 1.4):
        opt = OptionSpec(kind="put", strike=strike, maturity=maturity, spot=spot)
        price = bs_price(opt, BsContext(vol=vol), spot)
        assertpy.assert_that(price).is_close_to(_integrated_put(opt, vol), 1e-10)


def test_atm_put_closed_form(atm_put, bs_context):
    expected = 2.0 * norm.cdf(0.5 * SIGMA) - 1.0
    assertpy.assert_that(bs_price(atm_put, bs_context, 1.0)).is_close_to(expected, 1e-14)


def test_put_call_parity(atm_put, atm_call, bs_context):
    s = np.linspace(0.5, 2.0, 31)
    gap = bs_price(atm_call, bs_context, s) - bs_price(atm_put, bs_context, s)
    np.testing.assert_allclose(gap, s - STRIKE, atol=1e-14)


def test_bs_price_keeps_input_shape(atm_put, bs_context):
    assertpy.assert_that(bs_price(atm_put, bs_context, 1.0)).is_instance_of(float)
    assertpy.assert_that(bs_price(atm_put, bs_context, np.ones(5)).shape).is_equal_to((5,))


def test_first_two_greeks(atm_put, atm_call, bs_context):
    s = np.array([0.8, 1.0, 1.2])
    put, call = cash_greeks(atm_put, bs_context, s, 2), cash_greeks(atm_call, bs_context, s, 2)
    delta_1 = d_plus(atm_put, bs_context, s)
    np.testing.assert_allclose(put[0], s * (norm.cdf(delta_1) - 1.0), atol=1e-15)
    np.testing.assert_allclose(call[0] - put[0], s, atol=1e-15)
    np.testing.assert_array_equal(put[1], call[1])
    np.testing.assert_allclose(put[1], s * norm.pdf(delta_1) / SIGMA, rtol=1e-14)


def test_put_and_call_share_higher_greeks(atm_put, atm_call, bs_context):
    s = np.linspace(0.6, 1.6, 11)
    put = cash_greeks(atm_put, bs_context, s, 6)
    call = cash_greeks(atm_call, bs_context, s, 6)
    np.testing.assert_array_equal(put[1:], call[1:])


@pytest.mark.parametrize("strike,maturity,vol", CASES)
def test_recurrence_matches_explicit_forms(strike, maturity, vol):
    rng = np.random.default_rng(7)
    s = rng.uniform(0.5, 2.0, 1000)
    opt = OptionSpec(kind="put", strike=strike, maturity=maturity, spot=1.0)
    ctx = BsContext(vol=vol)
    greeks = cash_greeks(opt, ctx, s, 6)[1:]
    explicit = _explicit_greeks(opt, ctx, s)
    for order, (ours, theirs) in enumerate(zip(greeks, explicit), start=2):
        scale = np.max(np.abs(theirs))
        np.testing.assert_allclose(
            ours, theirs, rtol=1e-9, atol=1e-12 * scale, err_msg=f"d{order}"
        )


def test_recurrence_matches_explicit_forms_on_random_contracts():
    rng = np.random.default_rng(11)
    for _ in range(100):
        strike, maturity, vol = rng.uniform(0.5, 2.0), rng.uniform(0.1, 3.0), rng.uniform(0.1, 0.6)
        opt = OptionSpec(kind="put", strike=strike, maturity=maturity, spot=1.0)
        ctx = BsContext(vol=vol)
        s = rng.uniform(0.3, 3.0, 1000)
        v = vol**2 * maturity
        growth = np.abs(d_plus(opt, ctx, s) / math.sqrt(v) + 1.0) + 1.0 / v
        explicit = _explicit_greeks(opt, ctx, s)
        greeks = cash_greeks(opt, ctx, s, 6)[1:]
        for order, (ours, theirs) in enumerate(zip(greeks, explicit), start=2):
            scale = np.abs(explicit[0]) * growth ** (order - 2)
            np.testing.assert_array_less(np.abs(ours - theirs), 1e-12 * scale + 1e-300)


def test_greeks_at_evaluation_time(atm_put):
    early = cash_greeks(atm_put, BsContext(vol=SIGMA, t=0.5), 1.0, 6)
    shorter = cash_greeks(atm_put.with_(maturity=0.5), BsContext(vol=SIGMA), 1.0, 6)
    np.testing.assert_allclose(early, shorter, rtol=1e-14)


def test_greek_order_bounds(atm_put, bs_context):
    with pytest.raises(DomainError):
        cash_greeks(atm_put, bs_context, 1.0, 0)
    with pytest.raises(DomainError):
        cash_greeks(atm_put, bs_context, 1.0, 7)


def test_gamma_integral_at_zero_moneyness_offset():
    sigma_bar = math.sqrt(SIGMA_BAR_SQ)
    strike, maturity = 1.3, 0.75
    spot = strike * math.exp(0.5 * SIGMA_BAR_SQ * maturity)
    value = gamma_integral(strike, spot, maturity, sigma_bar)
    assertpy.assert_that(value).is_close_to(strike**2 / (4.0 * SIGMA_BAR_SQ), 1e-12)


@pytest.mark.parametrize("factor", [0.5, 2.0, 2.5, 10.0])
def test_gamma_integral_scales_with_strike_squared(factor):
    base = gamma_integral(1.0, 0.9, 1.0, 0.3)
    scaled = gamma_integral(factor, 0.9 * factor, 1.0, 0.3)
    assertpy.assert_that(scaled).is_close_to(factor**2 * base, 1e-12 * scaled)


def test_gamma_integral_depends_on_squared_offset():
    sigma_bar, maturity, strike = 0.3, 1.0, 1.0
    centre = math.log(strike) + 0.5 * sigma_bar**2 * maturity
    above = gamma_integral(strike, math.exp(centre + 0.2), maturity, sigma_bar)
    below = gamma_integral(strike, math.exp(centre - 0.2), maturity, sigma_bar)
    assertpy.assert_that(above).is_close_to(below, 1e-12 * above)


def test_gamma_integral_peaks_near_the_money(atm_put):
    sigma_bar = 0.2
    at_the_money = put_gamma_integral(atm_put, sigma_bar)
    for strike in (0.5, 2.0):
        away = put_gamma_integral(atm_put.with_(strike=strike), sigma_bar)
        assertpy.assert_that(away).is_less_than(at_the_money)


def test_put_gamma_integral_requires_put(atm_call):
    with pytest.raises(DomainError):
        put_gamma_integral(atm_call, 0.2)
    with pytest.raises(ValidationError):
        gamma_integral(1.0, 1.0, 1.0, 0.0)


def test_quadrature_rules_integrate_polynomials():
    points, weights = gauss_legendre(0.0, 2.0, 8)
    assertpy.assert_that(float(np.dot(weights, points**5))).is_close_to(64.0 / 6.0, 1e-12)
    points, weights = composite_gauss_legendre(-1.0, 1.0, 4, 3)
    assertpy.assert_that(points.size).is_equal_to(12)
    integral = float(np.dot(weights, np.cos(points)))
    assertpy.assert_that(integral).is_close_to(2 * math.sin(1), 1e-8)
    knots, weights = gauss_hermite(20)
    second_moment = float(np.dot(weights, knots**2))
    assertpy.assert_that(second_moment).is_close_to(math.sqrt(math.pi) / 2, 1e-12)
