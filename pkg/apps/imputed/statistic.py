"""
Finite-sample imputed e-statistic.

At each step the observed batch (D^0, X~^0) is joined by M datasets drawn
from the null. The same learning rule is fitted on every D^i and predicts
the labels of its own X~^i; the step's e-value is the soft rank of the
observed score among all M + 1 scores:

    e = (M + 1) K(Y~^0) / sum_{i=0..M} K(Y~^i),   K(y) = sum_j exp(gamma * y_j).

Because the predictions are bits, K only depends on the number of ones:
K = c0 + c1 * exp(gamma).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from classifiers.classifier_kind import ClassifierKind
from classifiers.constants import DEFAULT_TAU
from classifiers.predictors import ConditionalEstimates, bayes_posteriors, predict_batch, threshold_posteriors
from core.exceptions import DomainError
from core.sampling import draw_covariates, draw_pairs
from core.shift_regime import ShiftRegime
from imputed.evalue import EValue

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ImputedConfig:
    M: int
    regime: ShiftRegime
    null_dist: object
    classifier: ClassifierKind
    n: int
    N: int
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        object.__setattr__(self, "regime", ShiftRegime.parse(self.regime))
        object.__setattr__(self, "classifier", ClassifierKind.parse(self.classifier))
        if self.M < 0:
            raise DomainError(f"M must be nonnegative, got {self.M}.")
        if self.n < 1 or self.N < 1:
            raise DomainError(f"Batch sizes must be positive, got n={self.n}, N={self.N}.")
        if not 0.0 < self.tau < 1.0:
            raise DomainError(f"tau must lie in (0, 1), got {self.tau}.")


@dataclass(frozen=True, eq=False)
class ImputedDiagnostics:
    """What one step saw: counts of predicted ones and scores for all M + 1 datasets."""
    gamma: float
    N: int
    ones: np.ndarray
    scores: np.ndarray
    e_value: float
    null_xs: np.ndarray
    null_ys: np.ndarray

    def soft_ranks(self):
        return soft_ranks(self.scores)

    def gradient(self):
        return _grad_from_counts(self.ones, self.N, self.gamma)


def _scores_from_counts(ones, N, gamma):
    ones = np.asarray(ones, dtype=float)
    return (N - ones) + ones * math.exp(gamma)


def score_K(predictions, gamma):
    predictions = np.asarray(predictions)
    if predictions.size == 0:
        raise DomainError("The score of an empty prediction vector is undefined.")
    if gamma < 0:
        raise DomainError(f"gamma must be nonnegative, got {gamma}.")
    ones = int(predictions.sum())
    return float(_scores_from_counts(ones, predictions.size, gamma))


def soft_ranks(scores):
    """e^j obtained by placing dataset j in the numerator; sums to M + 1."""
    scores = np.asarray(scores, dtype=float)
    return scores.size * scores / scores.sum()


def _grad_from_counts(ones, N, gamma):
    ones = np.asarray(ones, dtype=float)
    scores = _scores_from_counts(ones, N, gamma)
    growth = math.exp(gamma)
    return float(ones[0] * growth / scores[0] - (ones * growth).sum() / scores.sum())


def grad_log_e_gamma(predictions, gamma):
    """
    d/dgamma of log e for an (M + 1, N) matrix of predictions, row 0 observed.
    """
    predictions = np.atleast_2d(np.asarray(predictions))
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}.")
    return _grad_from_counts(predictions.sum(axis=1), predictions.shape[1], gamma)


def fit_and_predict(cfg, xs, ys, covariates, generator, cond=None):
    """
    Fit the configured rule on every row of (xs, ys) and predict the matching
    row of ``covariates``.
    """
    if cfg.classifier is ClassifierKind.THRESHOLD:
        if cond is None:
            cond = ConditionalEstimates.exact(cfg.null_dist)
        posteriors = threshold_posteriors(ys, cond)
    else:
        posteriors = bayes_posteriors(xs, ys)
    return predict_batch(cfg.classifier, posteriors, covariates, generator=generator, tau=cfg.tau)


def imputed_e_step(observed, cfg, params, cond=None, rng=None, null_dist=None):
    """
    One step of the imputed e-process.

    ``cond`` is the threshold rule's P(X|Y) estimate (pooled from earlier
    null data); ``null_dist`` overrides ``cfg.null_dist`` when the null is
    being estimated. Returns (EValue, ImputedDiagnostics).
    """
    labeled, unlabeled = observed
    if len(labeled) != cfg.n or len(unlabeled) != cfg.N:
        raise DomainError(f"Observed batch sizes ({len(labeled)}, {len(unlabeled)}) "
                          f"differ from the configured (n={cfg.n}, N={cfg.N}).")
    if rng is None:
        raise DomainError("The imputed statistic needs a random stream for the null datasets.")
    null_dist = null_dist or cfg.null_dist
    generator = rng.generator()

    null_xs, null_ys = draw_pairs(null_dist, (cfg.M, cfg.n), generator)
    null_us = draw_covariates(null_dist, (cfg.M, cfg.N), generator)
    xs = np.vstack([labeled.xs[None, :], null_xs])
    ys = np.vstack([labeled.ys[None, :], null_ys])
    us = np.vstack([unlabeled.xs[None, :], null_us])

    predictions = fit_and_predict(cfg, xs, ys, us, generator, cond=cond)
    ones = predictions.sum(axis=1)
    scores = _scores_from_counts(ones, cfg.N, params.gamma)
    e_value = (cfg.M + 1) * scores[0] / scores.sum()

    logger.debug("imputed step: gamma=%.4f e=%.6f observed ones=%d", params.gamma, e_value, ones[0])
    diagnostics = ImputedDiagnostics(
        gamma=params.gamma,
        N=cfg.N,
        ones=ones,
        scores=scores,
        e_value=float(e_value),
        null_xs=null_xs,
        null_ys=null_ys,
    )
    return EValue(e_value), diagnostics
