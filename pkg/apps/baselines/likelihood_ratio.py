"""
Sequential likelihood-ratio e-processes with a Krichevsky-Trofimov plug-in
alternative.

Each point pays q^(b) / p_null(b), where q^ is the KT predictive mean
(ones + 1/2) / (total + 1) computed before the point is seen. Feeding y bits
gives the LR e-process for P(Y), feeding x bits the one for P(X); routing each
pair to a per-x estimator gives the one for P(Y|X).
"""
from dataclasses import dataclass

import numpy as np

from baselines.constants import KT_PSEUDOCOUNT
from core.exceptions import DomainError
from imputed.evalue import EValue


@dataclass(frozen=True)
class KTEstimator:
    ones: int = 0
    total: int = 0

    def __post_init__(self):
        if not 0 <= self.ones <= self.total:
            raise DomainError(f"Need 0 <= ones <= total, got ones={self.ones}, total={self.total}.")

    @property
    def predictive_mean(self):
        return (self.ones + KT_PSEUDOCOUNT) / (self.total + 2 * KT_PSEUDOCOUNT)

    def updated(self, bits):
        bits = np.asarray(bits)
        return KTEstimator(self.ones + int(bits.sum()), self.total + int(bits.size))


def _check_null(theta_null):
    if not 0.0 < theta_null < 1.0:
        raise DomainError(f"The null Bernoulli parameter must lie in (0, 1), got {theta_null!r}.")


def lr_payoffs(bits, theta_null, est):
    """Per-point payoffs of a bit sequence, each against the KT mean before it."""
    _check_null(theta_null)
    bits = np.asarray(bits, dtype=float)
    seen = np.arange(bits.size)
    ones_before = est.ones + np.concatenate([[0.0], np.cumsum(bits)[:-1]])
    q1 = (ones_before + KT_PSEUDOCOUNT) / (est.total + seen + 2 * KT_PSEUDOCOUNT)
    q = np.where(bits == 1, q1, 1.0 - q1)
    p_null = np.where(bits == 1, theta_null, 1.0 - theta_null)
    return q / p_null


def lr_step(bits, theta_null, est):
    """Batch payoff (product over points) and the updated estimator."""
    payoffs = lr_payoffs(bits, theta_null, est)
    return EValue(float(np.prod(payoffs))), est.updated(bits)


@dataclass(frozen=True)
class ConditionalKT:
    """One KT estimator per value of x, for the P(Y|X) likelihood ratio."""
    given_x0: KTEstimator = KTEstimator()
    given_x1: KTEstimator = KTEstimator()


def lr_conditional_step(labeled, theta_null_given_x, est):
    """
    Likelihood ratio for P(Y|X): pairs with x = 0 are scored by the first
    estimator against theta_null_given_x[0], pairs with x = 1 by the second.
    """
    value = 1.0
    updated = []
    for x, sub_est in ((0, est.given_x0), (1, est.given_x1)):
        ys = labeled.ys[labeled.xs == x]
        if ys.size:
            e, sub_est = lr_step(ys, theta_null_given_x[x], sub_est)
            value *= e.value
        updated.append(sub_est)
    return EValue(value), ConditionalKT(*updated)
