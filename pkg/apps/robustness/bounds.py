"""
Total-variation bounds for running the imputed test on an estimated null.

Using an approximate null inflates the type-I error by at most the TV
distance between the true and approximate laws of the whole observed
sequence. For binary data that distance is bounded per step by
n * d(P_XY) + N * d(P_X), and over t steps, with M1 labeled and M2 unlabeled
null samples drawn per step, with probability 1 - delta by

    2 sqrt(t) (sqrt(n^2 K_XY / (2 M1)) + sqrt(N^2 K_X / (2 M2))),
    K_XY = 4 ln 2 + ln(2t/delta),  K_X = 2 ln 2 + ln(2t/delta).
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from core.exceptions import DomainError, SizeError
from robustness.constants import LOG2_CELLS_X, LOG2_CELLS_XY, STEP_TV_ENUMERATION_LIMIT, TV_SUM_TOLERANCE


@dataclass(frozen=True)
class TvBoundInputs:
    t: int
    n: int
    N: int
    M1: int
    M2: int
    delta: float

    def __post_init__(self):
        for name in ("t", "n", "N", "M1", "M2"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be at least 1, got {getattr(self, name)}.")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}.")


def tv_categorical(p, q):
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise DomainError(f"Support mismatch: {p.size} vs {q.size} categories.")
    for table in (p, q):
        if (table < 0).any() or abs(table.sum() - 1.0) > TV_SUM_TOLERANCE:
            raise DomainError("Both arguments must be probability tables.")
    return float(0.5 * np.abs(p - q).sum())


def step_tv_bound(n, N, tv_xy, tv_x):
    for name, value in (("tv_xy", tv_xy), ("tv_x", tv_x)):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {value}.")
    return n * tv_xy + N * tv_x


def sequence_tv_bound(inp):
    log_term = math.log(2.0 * inp.t / inp.delta)
    k_xy = LOG2_CELLS_XY + log_term
    k_x = LOG2_CELLS_X + log_term
    return 2.0 * math.sqrt(inp.t) * (
        math.sqrt(inp.n ** 2 * k_xy / (2.0 * inp.M1)) + math.sqrt(inp.N ** 2 * k_x / (2.0 * inp.M2))
    )


def _step_law(dist, n, N):
    """Probabilities of every (n pairs, N covariates) outcome, in a fixed order."""
    cells = dist.cells()
    theta_x = dist.theta_x
    pair_probs = [math.prod(cells[c] for c in combo) for combo in itertools.product(range(4), repeat=n)]
    cov_probs = [math.prod(theta_x if u else 1.0 - theta_x for u in combo)
                 for combo in itertools.product((0, 1), repeat=N)]
    return np.outer(pair_probs, cov_probs).ravel()


def step_tv_exact(p_dist, q_dist, n, N):
    """TV between the per-step laws of (D, X~) under two joint tables, by enumeration."""
    if n + N > STEP_TV_ENUMERATION_LIMIT:
        raise SizeError(f"n + N = {n + N} exceeds the enumeration limit {STEP_TV_ENUMERATION_LIMIT}.")
    return tv_categorical(_step_law(p_dist, n, N), _step_law(q_dist, n, N))
