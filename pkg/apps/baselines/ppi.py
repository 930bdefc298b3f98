"""
Prediction-powered betting e-process for the mean of Y.

Each labeled point (x, y) is paired with a slice of unlabeled covariates and
pays 1 + lambda * (w - theta0), where

    w = y + epsilon * (mean of f^ over the slice - f^(x))

is the prediction-powered estimate of E[Y]. epsilon is fitted from history
to shrink the variance of w and clamped to [-1, 1]; lambda is set by the
online Newton step and kept in [-1/2, 1/2] ([0, 1/2] one-sided). Together the
two clamps keep every payoff positive.

The predictor f^ and epsilon are refit from history at the start of every
batch and stay fixed inside it; lambda moves point by point. A
``labeled_only`` state keeps epsilon at 0, which leaves the same bet on the
labeled points alone.
"""
import itertools
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from baselines.constants import (
    LAMBDA_MAX, LAMBDA_MIN_ONE_SIDED, LAMBDA_MIN_TWO_SIDED, ONS_A0, ONS_GRADIENTS, ONS_SCALE,
    PPI_ENUMERATION_SLICE, PPI_MIN_HISTORY, PPI_VARIANCE_FLOOR,
)
from classifiers.classifier_kind import ClassifierKind
from classifiers.constants import DEFAULT_TAU
from classifiers.predictors import ClassifierModel, posteriors_from_prior, untrained
from core.constants import CELL_ORDER
from core.exceptions import DomainError, SizeError
from imputed.evalue import EValue

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PpiHistory:
    """Running sums of past (y, f^(x)) pairs; enough for their covariance and variance."""
    count: int = 0
    sum_y: float = 0.0
    sum_f: float = 0.0
    sum_yf: float = 0.0
    sum_ff: float = 0.0

    def add(self, y, f):
        return PpiHistory(
            self.count + 1,
            self.sum_y + y,
            self.sum_f + f,
            self.sum_yf + y * f,
            self.sum_ff + f * f,
        )

    @classmethod
    def from_pairs(cls, pairs):
        history = cls()
        for y, f in pairs:
            history = history.add(float(y), float(f))
        return history


def ppi_epsilon(history, N):
    """
    Cov(Y, f^(X)) / ((1 + 1/N) Var(f^(X))) from past pairs, clamped to [-1, 1].
    Histories shorter than two pairs, or with constant f^, give 0.
    """
    if not isinstance(history, PpiHistory):
        history = PpiHistory.from_pairs(history)
    c = history.count
    if c < PPI_MIN_HISTORY:
        return 0.0
    var = (history.sum_ff - history.sum_f ** 2 / c) / (c - 1)
    if var <= PPI_VARIANCE_FLOOR:
        return 0.0
    cov = (history.sum_yf - history.sum_y * history.sum_f / c) / (c - 1)
    eps = cov / ((1.0 + 1.0 / N) * var)
    return min(1.0, max(-1.0, eps))


@dataclass(frozen=True)
class PpiState:
    lam: float = 0.0
    a: float = ONS_A0
    epsilon: float = 0.0
    history: PpiHistory = PpiHistory()
    model: Optional[ClassifierModel] = None
    classifier: ClassifierKind = ClassifierKind.THRESHOLD
    tau: float = DEFAULT_TAU
    one_sided: bool = False
    gradient: str = "centered"
    # epsilon stays 0: the bet ignores the unlabeled correction
    labeled_only: bool = False
    # (count x=0, ones x=0, count x=1, ones x=1) over every labeled pair seen
    labeled_counts: Tuple[int, int, int, int] = (0, 0, 0, 0)

    def __post_init__(self):
        object.__setattr__(self, "classifier", ClassifierKind.parse(self.classifier))
        if self.gradient not in ONS_GRADIENTS:
            raise DomainError(f"ONS gradient must be one of {ONS_GRADIENTS}, got {self.gradient!r}.")
        if not self.lam_lo <= self.lam <= LAMBDA_MAX:
            raise DomainError(f"lambda={self.lam} outside [{self.lam_lo}, {LAMBDA_MAX}].")
        if not -1.0 <= self.epsilon <= 1.0:
            raise DomainError(f"epsilon={self.epsilon} outside [-1, 1].")
        if self.a <= 0.0:
            raise DomainError("ONS curvature must be positive.")

    @property
    def lam_lo(self):
        return LAMBDA_MIN_ONE_SIDED if self.one_sided else LAMBDA_MIN_TWO_SIDED


def refit_predictor(state, cond=None):
    """f^ from the labeled history: Bayes frequencies, or the threshold rule with ``cond``."""
    n0, ones0, n1, ones1 = state.labeled_counts
    total = n0 + n1
    if total == 0:
        return untrained(state.classifier, state.tau)
    if state.classifier is ClassifierKind.BAYES:
        posterior = (ones0 / n0 if n0 else 0.0, ones1 / n1 if n1 else 0.0)
        return ClassifierModel(ClassifierKind.BAYES, posterior)
    if cond is None:
        raise DomainError("The threshold predictor needs conditional estimates of P(X|Y).")
    row = posteriors_from_prior([(ones0 + ones1) / total], cond)[0]
    return ClassifierModel(ClassifierKind.THRESHOLD, (float(row[0]), float(row[1])), tau=state.tau)


def _predict(model, xs, generator):
    """f^ on an array of covariates; no model means f^ = 0."""
    xs = np.asarray(xs)
    if model is None:
        return np.zeros(xs.shape)
    probs = np.asarray(model.posterior)[xs.astype(np.intp)]
    if not model.is_randomized:
        return (probs > model.tau).astype(float)
    if generator is None:
        raise DomainError("A randomized predictor needs a random generator.")
    return (generator.random(probs.shape) < probs).astype(float)


def _estimate(y, x, unlabeled_slice, state, generator):
    unlabeled_slice = np.asarray(unlabeled_slice)
    if unlabeled_slice.size == 0:
        raise DomainError("Each labeled point needs a non-empty unlabeled slice.")
    f_x = float(_predict(state.model, np.array([x]), generator)[0])
    f_slice = _predict(state.model, unlabeled_slice, generator)
    w = y + state.epsilon * (float(f_slice.mean()) - f_x)
    return w, f_x


def ppi_payoff(y, x, unlabeled_slice, state, theta_null, generator=None):
    w, _ = _estimate(y, x, unlabeled_slice, state, generator)
    return EValue(1.0 + state.lam * (w - theta_null))


def ons_update(state, w, theta_null):
    """One online Newton step on lambda after observing estimate ``w``."""
    if state.gradient == "centered":
        centered = w - theta_null
        wealth_factor = 1.0 + state.lam * centered
        assert wealth_factor > 0.0, "PPI payoff must stay positive"
        g = centered / wealth_factor
    else:
        g = w / max(1.0 + w * state.lam, PPI_VARIANCE_FLOOR)
    a = state.a + g * g
    lam = min(LAMBDA_MAX, max(state.lam_lo, state.lam + ONS_SCALE * g / a))
    return replace(state, lam=lam, a=a)


def unlabeled_slices(n, N):
    """
    Index ranges of the unlabeled batch assigned to each of the n labeled points:
    disjoint slices of N // n, the remainder going to the last one. When N < n
    the first N points get one covariate each and the rest share the whole batch.
    """
    if N >= n:
        size = N // n
        bounds = [(i * size, (i + 1) * size) for i in range(n)]
        bounds[-1] = (bounds[-1][0], N)
        return bounds
    return [(i, i + 1) for i in range(N)] + [(0, N)] * (n - N)


def ppi_step(labeled, unlabeled, state, theta_null, generator=None, cond=None):
    """
    Process one batch point by point; returns (product of payoffs, new state).
    """
    n, N = len(labeled), len(unlabeled)
    slices = unlabeled_slices(n, N)
    slice_size = max(1, N // n)
    epsilon = 0.0 if state.labeled_only else ppi_epsilon(state.history, slice_size)
    state = replace(state, model=refit_predictor(state, cond), epsilon=epsilon)

    value = 1.0
    history = state.history
    for i, (lo, hi) in enumerate(slices):
        x, y = int(labeled.xs[i]), int(labeled.ys[i])
        w, f_x = _estimate(y, x, unlabeled.xs[lo:hi], state, generator)
        value *= 1.0 + state.lam * (w - theta_null)
        state = ons_update(state, w, theta_null)
        history = history.add(float(y), f_x)

    n0 = int((labeled.xs == 0).sum())
    ones1 = int(labeled.ys[labeled.xs == 1].sum())
    ones0 = int(labeled.ys.sum()) - ones1
    c = state.labeled_counts
    counts = (c[0] + n0, c[1] + ones0, c[2] + n - n0, c[3] + ones1)
    logger.debug("ppi step: lambda=%.4f epsilon=%.4f e=%.6f", state.lam, state.epsilon, value)
    return EValue(value), replace(state, history=history, labeled_counts=counts)


def ppi_expected_payoff_bruteforce(null_dist, state, theta_null=None, slice_size=1):
    """
    Exact E_null[payoff] for one labeled point and its slice, with lambda,
    epsilon and f^ held at their values in ``state``. Enumerates the pair,
    the slice and every randomized prediction.
    """
    if slice_size < 1 or slice_size > PPI_ENUMERATION_SLICE:
        raise SizeError(f"Slice length {slice_size} outside the enumerable range [1, {PPI_ENUMERATION_SLICE}].")
    theta_null = null_dist.theta_y if theta_null is None else theta_null
    model = state.model
    theta_x = null_dist.theta_x

    def prob_one(x):
        return model.expected(x) if model is not None else 0.0

    total = 0.0
    for cell, (x, y) in enumerate(CELL_ORDER):
        p_pair = null_dist.cells()[cell]
        if p_pair == 0.0:
            continue
        for covariates in itertools.product((0, 1), repeat=slice_size):
            p_cov = math.prod(theta_x if u else 1.0 - theta_x for u in covariates)
            if p_cov == 0.0:
                continue
            for bits in itertools.product((0, 1), repeat=slice_size + 1):
                f_x, f_slice = bits[0], bits[1:]
                p_bits = (prob_one(x) if f_x else 1.0 - prob_one(x)) * math.prod(
                    prob_one(u) if f else 1.0 - prob_one(u) for u, f in zip(covariates, f_slice))
                if p_bits == 0.0:
                    continue
                w = y + state.epsilon * (sum(f_slice) / slice_size - f_x)
                total += p_pair * p_cov * p_bits * (1.0 + state.lam * (w - theta_null))
    return total
