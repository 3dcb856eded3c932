from app.asym_pricer.pricer import (
    SWEEP_KEYS,
    AsymptoticPrice,
    AsymptoticQuote,
    SpreadDecomposition,
    asymptotic_price,
    asymptotic_quote,
    bid_ask_spread,
    curve_frame,
    jump_sensitivity,
    price_curve,
    sensitivity_curve,
    spread_decomposition,
)

__all__ = [
    "SWEEP_KEYS",
    "AsymptoticPrice",
    "AsymptoticQuote",
    "SpreadDecomposition",
    "asymptotic_price",
    "asymptotic_quote",
    "bid_ask_spread",
    "curve_frame",
    "jump_sensitivity",
    "price_curve",
    "sensitivity_curve",
    "spread_decomposition",
]
