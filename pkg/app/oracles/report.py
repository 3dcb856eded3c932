from dataclasses import asdict, dataclass
from typing import Optional

from app.errors import ValidationError

METHODS = ("series", "quadrature", "finite-diff", "monte-carlo")


@dataclass(frozen=True)
class OracleReport:
    """A reference value with the method that produced it and its error estimate."""

    value: float
    method: str
    error_estimate: float
    seed: Optional[int] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"must be one of {METHODS}", field_path="report.method")
        if not self.error_estimate >= 0:
            raise ValidationError("must be >= 0", field_path="report.error_estimate")
        if self.method == "monte-carlo" and self.seed is None:
            raise ValidationError("Monte Carlo reports need a seed", field_path="report.seed")

    def to_dict(self) -> dict:
        return asdict(self)

    def brackets(self, value: float, n_errors: float = 3.0) -> bool:
        """True when |value - self.value| <= n_errors * error_estimate."""
        return abs(value - self.value) <= n_errors * self.error_estimate
