"""
Contract and Black-Scholes evaluation context types.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from app.errors import DomainError, ValidationError

KINDS = ("put", "call")


@dataclass(frozen=True)
class OptionSpec:
    """European put or call with zero interest rate."""

    kind: str
    strike: float
    maturity: float
    spot: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"must be one of {KINDS}", field_path="option.kind")
        for name in ("strike", "maturity", "spot"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(
                    f"must be a positive number, got {value!r}", field_path=f"option.{name}"
                )

    @property
    def is_put(self) -> bool:
        return self.kind == "put"

    def payoff(self, s):
        """Terminal pay-off at spot s (scalar or array)."""
        s = np.asarray(s, dtype=float)
        value = self.strike - s if self.is_put else s - self.strike
        value = np.maximum(value, 0.0)
        return float(value) if value.ndim == 0 else value

    def with_(self, **changes) -> "OptionSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class BsContext:
    """Black-Scholes volatility and evaluation time."""

    vol: float
    t: float = 0.0

    def __post_init__(self):
        if not self.vol > 0:
            raise ValidationError("must be > 0", field_path="context.vol")
        if not self.t >= 0:
            raise ValidationError("must be >= 0", field_path="context.t")

    def tau(self, opt: OptionSpec) -> float:
        """Time to maturity; greeks are singular at t = T."""
        tau = opt.maturity - self.t
        if not tau > 0:
            raise DomainError(f"evaluation time t={self.t} must precede maturity {opt.maturity}")
        return tau
