"""
The two prediction rules used by the imputed statistic.

Both map a binary covariate to a binary label through a fitted posterior
table P^(Y=1 | X=x), x in {0, 1}:

  threshold  posterior from the batch mean of Y and pooled null estimates of
             P(X|Y); predicts indicator(posterior > tau).
  bayes      posterior from the per-x label frequencies of the batch;
             predicts a Bernoulli(posterior) draw.

The ``*_batch`` functions fit many datasets at once (one row per dataset)
and are what the per-step statistic runs; the single-dataset functions are
thin wrappers over them.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from classifiers.classifier_kind import ClassifierKind
from classifiers.constants import DEFAULT_TAU, LAPLACE_PSEUDOCOUNT
from core.exceptions import DomainError
from core.rng import RngHandle


@dataclass(frozen=True)
class ConditionalEstimates:
    """Estimates of P(X=1|Y=y) with the counts they were pooled from."""
    p_x1_given_y0_hat: float
    p_x1_given_y1_hat: float
    count_y0: int = 0
    count_y1: int = 0
    count_x1_y0: int = 0
    count_x1_y1: int = 0

    def __post_init__(self):
        for name in ("p_x1_given_y0_hat", "p_x1_given_y1_hat"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value!r}.")
        if min(self.count_y0, self.count_y1, self.count_x1_y0, self.count_x1_y1) < 0:
            raise DomainError("Support counts must be nonnegative.")

    @classmethod
    def from_counts(cls, count_y0, count_y1, count_x1_y0, count_x1_y1, pseudocount=LAPLACE_PSEUDOCOUNT):
        return cls(
            p_x1_given_y0_hat=(count_x1_y0 + pseudocount) / (count_y0 + 2 * pseudocount),
            p_x1_given_y1_hat=(count_x1_y1 + pseudocount) / (count_y1 + 2 * pseudocount),
            count_y0=int(count_y0),
            count_y1=int(count_y1),
            count_x1_y0=int(count_x1_y0),
            count_x1_y1=int(count_x1_y1),
        )

    @classmethod
    def empty(cls):
        return cls.from_counts(0, 0, 0, 0)

    @classmethod
    def exact(cls, dist):
        """The true conditionals of a joint table (no counts behind them)."""
        return cls(dist.p_x1_given_y(0), dist.p_x1_given_y(1))

    def pooled_with(self, xs, ys):
        """Add labeled null draws (any shape) to the running counts."""
        xs = np.asarray(xs)
        ys = np.asarray(ys)
        ones = int(ys.sum())
        x1_y1 = int((xs & ys).sum())
        x1 = int(xs.sum())
        return ConditionalEstimates.from_counts(
            self.count_y0 + ys.size - ones,
            self.count_y1 + ones,
            self.count_x1_y0 + x1 - x1_y1,
            self.count_x1_y1 + x1_y1,
        )

    def likelihoods(self):
        """Array L[y, x] = P^(X=x | Y=y)."""
        q0, q1 = self.p_x1_given_y0_hat, self.p_x1_given_y1_hat
        return np.array([[1.0 - q0, q0], [1.0 - q1, q1]])


@dataclass(frozen=True)
class ClassifierModel:
    kind: ClassifierKind
    posterior: Tuple[float, float]
    tau: Optional[float] = None

    def __post_init__(self):
        if len(self.posterior) != 2 or not all(0.0 <= p <= 1.0 for p in self.posterior):
            raise DomainError(f"Posterior table must hold two probabilities, got {self.posterior!r}.")
        if self.kind is ClassifierKind.THRESHOLD and not (self.tau is not None and 0.0 < self.tau < 1.0):
            raise DomainError(f"Threshold classifier needs tau in (0, 1), got {self.tau!r}.")

    @property
    def is_randomized(self):
        return self.kind is ClassifierKind.BAYES

    def expected(self, x):
        """Probability of predicting 1 at ``x``."""
        if self.kind is ClassifierKind.THRESHOLD:
            return 1.0 if self.posterior[x] > self.tau else 0.0
        return self.posterior[x]


def _check_tau(tau):
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie in (0, 1), got {tau!r}.")


def posteriors_from_prior(prior, cond):
    """
    Threshold-rule posterior tables for an array of priors P^(Y=1), shape (B, 2):
    prior * L(x|1) / (prior * L(x|1) + (1 - prior) * L(x|0)).
    A zero denominator gives posterior 0.
    """
    prior = np.asarray(prior, dtype=float).reshape(-1, 1)
    like = cond.likelihoods()
    num = prior * like[1][None, :]
    den = num + (1.0 - prior) * like[0][None, :]
    safe = np.where(den > 0.0, den, 1.0)
    return np.where(den > 0.0, num / safe, 0.0)


def threshold_posteriors(ys, cond):
    """Posterior tables for a stack of labeled datasets ``ys`` of shape (B, n)."""
    return posteriors_from_prior(np.atleast_2d(ys).mean(axis=1), cond)


def bayes_posteriors(xs, ys):
    """
    Per-x label frequencies for a stack of labeled datasets, shape (B, 2).
    Unseen x values get posterior 0.
    """
    xs = np.atleast_2d(xs)
    ys = np.atleast_2d(ys)
    ones_x1 = (xs * ys).sum(axis=1)
    count_x1 = xs.sum(axis=1)
    ones_x0 = ys.sum(axis=1) - ones_x1
    count_x0 = xs.shape[1] - count_x1
    counts = np.stack([count_x0, count_x1], axis=1).astype(float)
    ones = np.stack([ones_x0, ones_x1], axis=1).astype(float)
    safe = np.where(counts > 0, counts, 1.0)
    return np.where(counts > 0, ones / safe, 0.0)


def predict_batch(kind, posteriors, covariates, generator=None, tau=DEFAULT_TAU):
    """
    Predictions of B fitted models on B rows of covariates.

    ``posteriors`` is (B, 2), ``covariates`` is (B, N) of bits; returns (B, N)
    int8 predictions. Row b is predicted by the model of row b only.
    """
    covariates = np.atleast_2d(covariates)
    probs = np.take_along_axis(np.atleast_2d(posteriors), covariates.astype(np.intp), axis=1)
    if kind is ClassifierKind.THRESHOLD:
        return (probs > tau).astype(np.int8)
    if generator is None:
        raise DomainError("The Bayes classifier needs a random generator to predict.")
    return (generator.random(probs.shape) < probs).astype(np.int8)


def fit_threshold(D, cond, tau=DEFAULT_TAU):
    _check_tau(tau)
    posterior = threshold_posteriors(D.ys[None, :], cond)[0]
    return ClassifierModel(ClassifierKind.THRESHOLD, (float(posterior[0]), float(posterior[1])), tau=float(tau))


def fit_bayes(D):
    posterior = bayes_posteriors(D.xs[None, :], D.ys[None, :])[0]
    return ClassifierModel(ClassifierKind.BAYES, (float(posterior[0]), float(posterior[1])))


def fit(kind, D, cond=None, tau=DEFAULT_TAU):
    if ClassifierKind.parse(kind) is ClassifierKind.THRESHOLD:
        if cond is None:
            raise DomainError("The threshold classifier needs conditional estimates of P(X|Y).")
        return fit_threshold(D, cond, tau)
    return fit_bayes(D)


def predict(model, x, rng=None):
    """
    Single prediction; ``rng`` is only read by the Bayes rule. A RngHandle
    opens a fresh stream, so the same handle always yields the same draw;
    pass a numpy Generator to draw repeatedly from one stream.
    """
    if not model.is_randomized:
        return int(model.posterior[x] > model.tau)
    if rng is None:
        raise DomainError("The Bayes classifier needs a random stream to predict.")
    generator = rng.generator() if isinstance(rng, RngHandle) else rng
    return int(generator.random() < model.posterior[x])


def predict_many(model, xs, generator=None):
    """Predictions of one fitted model on a 1-d array of covariates."""
    return predict_batch(model.kind, np.array([model.posterior]), np.asarray(xs)[None, :],
                         generator=generator, tau=model.tau if model.tau is not None else DEFAULT_TAU)[0]


def untrained(kind, tau=DEFAULT_TAU):
    """The model fitted on no data: posterior 0 everywhere."""
    kind = ClassifierKind.parse(kind)
    return ClassifierModel(kind, (0.0, 0.0), tau=tau if kind is ClassifierKind.THRESHOLD else None)


