from app.bs_engine.black_scholes import MAX_GREEK_ORDER, bs_price, cash_greeks
from app.bs_engine.gamma_integral import gamma_integral, put_gamma_integral
from app.bs_engine.options import BsContext, OptionSpec

__all__ = [
    "MAX_GREEK_ORDER",
    "BsContext",
    "OptionSpec",
    "bs_price",
    "cash_greeks",
    "gamma_integral",
    "put_gamma_integral",
]
