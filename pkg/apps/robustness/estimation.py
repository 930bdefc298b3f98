"""
Empirical nulls built from samples of the null population.
"""
import logging

import numpy as np

from classifiers.predictors import ConditionalEstimates
from core.distributions import joint_from_concept_shift, joint_from_label_shift
from core.exceptions import DomainError
from core.sampling import draw_covariates, draw_pairs
from core.shift_regime import ShiftRegime
from robustness.constants import NULL_SMOOTHING

logger = logging.getLogger(__name__)


def _smoothed(ones, total, smoothing):
    if total + 2 * smoothing == 0:
        return 0.5
    return (ones + smoothing) / (total + 2 * smoothing)


def estimate_from_counts(counts, unlabeled_ones, unlabeled_total, regime, smoothing=NULL_SMOOTHING):
    """
    ``counts`` maps (x, y) -> number of labeled pairs. Reassembles a joint
    table along ``regime`` from smoothed marginal and conditional frequencies.
    """
    regime = ShiftRegime.parse(regime)
    n11, n10, n01, n00 = (counts[(1, 1)], counts[(1, 0)], counts[(0, 1)], counts[(0, 0)])
    total = n11 + n10 + n01 + n00
    if total == 0:
        raise DomainError("Estimating a null needs at least one labeled pair.")
    if regime is ShiftRegime.LABEL_SHIFT:
        theta_y = _smoothed(n11 + n01, total, smoothing)
        q0 = _smoothed(n10, n10 + n00, smoothing)
        q1 = _smoothed(n11, n11 + n01, smoothing)
        return joint_from_label_shift(theta_y, q0, q1)
    theta_x = _smoothed(n11 + n10 + unlabeled_ones, total + unlabeled_total, smoothing)
    r0 = _smoothed(n01, n01 + n00, smoothing)
    r1 = _smoothed(n11, n11 + n10, smoothing)
    return joint_from_concept_shift(theta_x, r0, r1)


def estimate_null_from_data(labeled, unlabeled, regime, smoothing=NULL_SMOOTHING):
    """
    Joint table estimated from labeled pairs and unlabeled covariates.

    Label shift: smoothed theta_Y with P(X|Y) from the pairs.
    Concept shift: smoothed P(Y|X) from the pairs with P(X) pooled over
    the pairs' x values and the unlabeled covariates.
    """
    labeled = list(labeled)
    if not labeled:
        raise DomainError("Estimating a null needs at least one labeled pair.")
    counts = {(1, 1): 0, (1, 0): 0, (0, 1): 0, (0, 0): 0}
    for x, y in labeled:
        counts[(int(x), int(y))] += 1
    unlabeled = np.asarray(list(unlabeled), dtype=int)
    return estimate_from_counts(counts, int(unlabeled.sum()), int(unlabeled.size), regime, smoothing)


class NullEstimator:
    """
    Running empirical null for the estimated-null mode: every step draws M1
    fresh labeled and M2 fresh unlabeled samples from the null population,
    pools them with all earlier draws, and re-estimates the null.
    """

    def __init__(self, population, regime, M1, M2, smoothing=NULL_SMOOTHING):
        self.population = population
        self.regime = ShiftRegime.parse(regime)
        self.M1 = M1
        self.M2 = M2
        self.smoothing = smoothing
        self.counts = {(1, 1): 0, (1, 0): 0, (0, 1): 0, (0, 0): 0}
        self.unlabeled_ones = 0
        self.unlabeled_total = 0

    def refresh(self, rng):
        generator = rng.generator()
        xs, ys = draw_pairs(self.population, self.M1, generator)
        us = draw_covariates(self.population, self.M2, generator)
        for x in (0, 1):
            for y in (0, 1):
                self.counts[(x, y)] += int(((xs == x) & (ys == y)).sum())
        self.unlabeled_ones += int(us.sum())
        self.unlabeled_total += int(us.size)
        estimate = estimate_from_counts(self.counts, self.unlabeled_ones, self.unlabeled_total,
                                        self.regime, self.smoothing)
        logger.debug("null estimate refreshed: %s", estimate.to_dict(self.regime))
        return estimate

    def conditional_estimates(self):
        """Pooled P(X|Y) counts for the threshold rule."""
        c = self.counts
        return ConditionalEstimates.from_counts(
            count_y0=c[(1, 0)] + c[(0, 0)],
            count_y1=c[(1, 1)] + c[(0, 1)],
            count_x1_y0=c[(1, 0)],
            count_x1_y1=c[(1, 1)],
        )
