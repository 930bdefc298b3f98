import math
from dataclasses import dataclass, replace

from core.exceptions import DomainError
from imputed.constants import ADAGRAD_EPS, ADAGRAD_LR, GAMMA_INIT, GAMMA_MAX, GAMMA_MIN


@dataclass(frozen=True)
class ScoreParams:
    gamma: float = GAMMA_INIT
    gamma_min: float = GAMMA_MIN
    gamma_max: float = GAMMA_MAX

    def __post_init__(self):
        if not 0.0 < self.gamma_min <= self.gamma_max:
            raise DomainError(f"Need 0 < gamma_min <= gamma_max, got [{self.gamma_min}, {self.gamma_max}].")
        if not self.gamma_min <= self.gamma <= self.gamma_max:
            raise DomainError(f"gamma={self.gamma} outside [{self.gamma_min}, {self.gamma_max}].")


@dataclass(frozen=True)
class GammaTunerState:
    """AdaGrad state for gamma; ascends the log e-value."""
    gamma: float = GAMMA_INIT
    accum: float = 0.0
    lr: float = ADAGRAD_LR
    gamma_min: float = GAMMA_MIN
    gamma_max: float = GAMMA_MAX

    def __post_init__(self):
        ScoreParams(self.gamma, self.gamma_min, self.gamma_max)
        if self.accum < 0.0:
            raise DomainError("Accumulated squared gradient must be nonnegative.")
        if self.lr <= 0.0:
            raise DomainError(f"Learning rate must be positive, got {self.lr}.")

    def score_params(self):
        return ScoreParams(self.gamma, self.gamma_min, self.gamma_max)


def adagrad_update(state, grad):
    grad = float(grad)
    accum = state.accum + grad * grad
    step = state.lr * grad / math.sqrt(accum + ADAGRAD_EPS)
    gamma = min(state.gamma_max, max(state.gamma_min, state.gamma + step))
    return replace(state, gamma=gamma, accum=accum)
