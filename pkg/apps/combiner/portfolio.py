"""
Convex combination of concurrent e-processes.

Weights live on the simplex and are learned with exponentiated gradient on
the log of the combined payoff. Weights used at step t depend on e-values
of steps before t only, so the combination is itself an e-process.
"""
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from combiner.constants import EG_ETA, SIMPLEX_TOLERANCE, WEALTH_FLOOR
from core.exceptions import DomainError
from imputed.evalue import EValue


@dataclass(frozen=True, eq=False)
class SimplexWeights:
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise DomainError("Weights must be a non-empty vector.")
        if (w < 0).any() or abs(w.sum() - 1.0) > SIMPLEX_TOLERANCE:
            raise DomainError(f"Weights must be nonnegative and sum to 1, got {w.tolist()}.")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, k):
        return cls(np.full(k, 1.0 / k))

    def __len__(self):
        return int(self.w.size)


def _values(evalues):
    return np.array([float(e) for e in evalues])


def combine(evalues, weights):
    values = _values(evalues)
    if values.size != len(weights):
        raise DomainError(f"Got {values.size} e-values for {len(weights)} weights.")
    return EValue(float(weights.w @ values))


def eg_update(weights, evalues, eta=EG_ETA):
    values = _values(evalues)
    if values.size != len(weights):
        raise DomainError(f"Got {values.size} e-values for {len(weights)} weights.")
    if eta <= 0:
        raise DomainError(f"EG learning rate must be positive, got {eta}.")
    mixed = float(weights.w @ values)
    if mixed <= 0.0:
        return weights
    logits = eta * values / mixed
    # shift for overflow safety; the normalization absorbs it
    unnorm = weights.w * np.exp(logits - logits.max())
    return SimplexWeights(unnorm / unnorm.sum())


@dataclass(frozen=True)
class EProcessState:
    alpha: float = 0.05
    log_wealth: float = 0.0
    step: int = 0
    stopped_at: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}.")

    @property
    def threshold(self):
        return math.log(1.0 / self.alpha)


def wealth_update(state, e):
    value = float(e)
    if value < 0.0:
        raise DomainError(f"e-values are nonnegative, got {value}.")
    log_wealth = state.log_wealth + math.log(max(value, WEALTH_FLOOR))
    step = state.step + 1
    stopped_at = state.stopped_at
    if stopped_at is None and log_wealth >= state.threshold:
        stopped_at = step
    return replace(state, log_wealth=log_wealth, step=step, stopped_at=stopped_at)


def check_rejection(state):
    return state.stopped_at is not None


class ConvexCombination:
    """
    Running conv(e_1, ..., e_k) process: combine with the current weights,
    account the wealth, then move the weights for the next step.
    """

    def __init__(self, members, alpha, eta=EG_ETA):
        self.members = tuple(members)
        self.eta = eta
        self.weights = SimplexWeights.uniform(len(self.members))
        self.state = EProcessState(alpha=alpha)

    def step(self, evalues_by_name):
        evalues = [evalues_by_name[name] for name in self.members]
        used = self.weights
        combined = combine(evalues, used)
        self.state = wealth_update(self.state, combined)
        self.weights = eg_update(used, evalues, self.eta)
        return combined, used
