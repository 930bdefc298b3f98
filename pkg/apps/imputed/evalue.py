import math
from dataclasses import dataclass

from core.exceptions import DomainError


@dataclass(frozen=True, order=True)
class EValue:
    """One step's betting payoff: nonnegative and finite."""
    value: float

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value) or value < 0.0:
            raise DomainError(f"An e-value must be finite and nonnegative, got {self.value!r}.")
        object.__setattr__(self, "value", value)

    def __float__(self):
        return self.value
