"""
Exact expectations under the null for tiny instances.

``brute_force_mean_e`` enumerates every joint outcome of the observed
dataset and the M null datasets (pairs, covariates and the Bayes rule's
coin flips) and returns E[e] exactly. Each dataset contributes only through
its number of predicted ones, so the joint sum runs over those counts after
the outcome budget has been checked on the raw product.
"""
import itertools
import logging
import math

import numpy as np

from baselines.ppi import PpiState, ppi_expected_payoff_bruteforce
from classifiers.classifier_kind import ClassifierKind
from classifiers.constants import DEFAULT_TAU
from classifiers.predictors import ClassifierModel
from core.exceptions import SizeError
from core.sampling import draw_covariates, draw_pairs
from harness.constants import ORACLE_MC_CHUNK
from imputed.constants import ENUMERATION_JOINT_OUTCOMES
from imputed.enumeration import dataset_outcomes, expected_K_bruteforce, population_e_value
from imputed.statistic import ImputedConfig, _scores_from_counts, fit_and_predict

logger = logging.getLogger(__name__)


def _ones_distribution(cfg):
    outcomes = dataset_outcomes(cfg)
    joint = len(outcomes) ** (cfg.M + 1)
    if joint > ENUMERATION_JOINT_OUTCOMES:
        raise SizeError(f"{len(outcomes)} outcomes per dataset over {cfg.M + 1} datasets is {joint} "
                        f"joint outcomes (limit {ENUMERATION_JOINT_OUTCOMES}).")
    probs = np.zeros(cfg.N + 1)
    for p, ones in outcomes:
        probs[ones] += p
    return probs


def brute_force_mean_e(regime, null_dist, classifier, gamma, n=1, N=1, M=1, tau=DEFAULT_TAU):
    cfg = ImputedConfig(M=M, regime=regime, null_dist=null_dist, classifier=classifier, n=n, N=N, tau=tau)
    probs = _ones_distribution(cfg)
    support = [k for k in range(N + 1) if probs[k] > 0.0]
    scores = _scores_from_counts(np.arange(N + 1), N, gamma)

    total = 0.0
    for counts in itertools.product(support, repeat=M + 1):
        p = math.prod(probs[k] for k in counts)
        total += p * (M + 1) * scores[counts[0]] / sum(scores[k] for k in counts)
    logger.debug("exact mean e for %s/%s n=%d N=%d M=%d: %.12f",
                 cfg.regime.value, cfg.classifier.value, n, N, M, total)
    return total


def monte_carlo_mean_e(regime, null_dist, classifier, gamma, rng, draws, n=1, N=1, M=1, tau=DEFAULT_TAU):
    """Sample mean of e over ``draws`` independent null instances, with its standard error."""
    cfg = ImputedConfig(M=M, regime=regime, null_dist=null_dist, classifier=classifier, n=n, N=N, tau=tau)
    generator = rng.generator()
    values = []
    remaining = draws
    while remaining > 0:
        size = min(remaining, ORACLE_MC_CHUNK)
        xs, ys = draw_pairs(null_dist, (size * (M + 1), n), generator)
        us = draw_covariates(null_dist, (size * (M + 1), N), generator)
        ones = fit_and_predict(cfg, xs, ys, us, generator).sum(axis=1).reshape(size, M + 1)
        scores = _scores_from_counts(ones, N, gamma)
        values.append((M + 1) * scores[:, 0] / scores.sum(axis=1))
        remaining -= size
    values = np.concatenate(values)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def expected_k(regime, null_dist, classifier, gamma, n=1, N=1, tau=DEFAULT_TAU):
    cfg = ImputedConfig(M=1, regime=regime, null_dist=null_dist, classifier=classifier, n=n, N=N, tau=tau)
    return expected_K_bruteforce(cfg, gamma)


def population_mean_e(regime, null_dist, classifier, gamma, n=1, N=1, tau=DEFAULT_TAU):
    """E_null of the imputed statistic with the exact denominator E_null[K]."""
    cfg = ImputedConfig(M=1, regime=regime, null_dist=null_dist, classifier=classifier, n=n, N=N, tau=tau)
    total = 0.0
    for p, ones in dataset_outcomes(cfg):
        predictions = np.r_[np.ones(ones), np.zeros(N - ones)]
        total += p * population_e_value(predictions, cfg, gamma)
    return total


def ppi_mean_payoff(null_dist, lam, epsilon, classifier=ClassifierKind.BAYES, slice_size=1,
                    one_sided=False, tau=DEFAULT_TAU):
    """
    Exact null mean of one PPI payoff. f^ is the null's own posterior
    P(Y=1|X), used as a Bernoulli draw (bayes) or thresholded at tau.
    """
    classifier = ClassifierKind.parse(classifier)
    posterior = (null_dist.p_y1_given_x(0), null_dist.p_y1_given_x(1))
    model = ClassifierModel(classifier, posterior, tau=tau if classifier is ClassifierKind.THRESHOLD else None)
    state = PpiState(lam=lam, epsilon=epsilon, model=model, classifier=classifier, tau=tau, one_sided=one_sided)
    return ppi_expected_payoff_bruteforce(null_dist, state, slice_size=slice_size)
