"""
Exact expectations for tiny instances by exhaustive enumeration.

A dataset is one labeled batch D (n pairs), one unlabeled batch X~ (N bits)
and, for the Bayes rule, the N coin flips of its randomized predictions.
``dataset_outcomes`` lists every such outcome with its exact probability and
the number of predicted ones, which is all the score K depends on.
"""
import itertools
import math

import numpy as np

from classifiers.classifier_kind import ClassifierKind
from classifiers.predictors import ConditionalEstimates, bayes_posteriors, threshold_posteriors
from core.constants import CELL_ORDER
from core.exceptions import SizeError
from imputed.constants import ENUMERATION_DATA_BITS, ENUMERATION_TOTAL_BITS
from imputed.statistic import _scores_from_counts


def _check_budget(cfg):
    data_bits = 2 * cfg.n + cfg.N
    total_bits = data_bits + (cfg.N if cfg.classifier is ClassifierKind.BAYES else 0)
    if data_bits > ENUMERATION_DATA_BITS or total_bits > ENUMERATION_TOTAL_BITS:
        raise SizeError(f"Instance n={cfg.n}, N={cfg.N} ({cfg.classifier.value}) is too large to enumerate: "
                        f"{data_bits} data bits (limit {ENUMERATION_DATA_BITS}), "
                        f"{total_bits} bits in total (limit {ENUMERATION_TOTAL_BITS}).")


def dataset_outcomes(cfg, cond=None, null_dist=None):
    """
    All outcomes of one null dataset as a list of (probability, ones).
    Outcomes with probability zero are dropped.
    """
    _check_budget(cfg)
    dist = null_dist or cfg.null_dist
    if cfg.classifier is ClassifierKind.THRESHOLD and cond is None:
        cond = ConditionalEstimates.exact(dist)
    cell_probs = dist.cells()
    theta_x = dist.theta_x

    outcomes = []
    for cells in itertools.product(range(4), repeat=cfg.n):
        p_data = math.prod(cell_probs[c] for c in cells)
        if p_data == 0.0:
            continue
        xs = np.array([[CELL_ORDER[c][0] for c in cells]])
        ys = np.array([[CELL_ORDER[c][1] for c in cells]])
        if cfg.classifier is ClassifierKind.THRESHOLD:
            posterior = threshold_posteriors(ys, cond)[0]
        else:
            posterior = bayes_posteriors(xs, ys)[0]

        for covariates in itertools.product((0, 1), repeat=cfg.N):
            p_cov = math.prod(theta_x if u else 1.0 - theta_x for u in covariates)
            if p_cov == 0.0:
                continue
            if cfg.classifier is ClassifierKind.THRESHOLD:
                ones = sum(int(posterior[u] > cfg.tau) for u in covariates)
                outcomes.append((p_data * p_cov, ones))
                continue
            for flips in itertools.product((0, 1), repeat=cfg.N):
                p_flip = math.prod(posterior[u] if f else 1.0 - posterior[u]
                                   for u, f in zip(covariates, flips))
                if p_flip == 0.0:
                    continue
                outcomes.append((p_data * p_cov * p_flip, sum(flips)))
    return outcomes


def expected_K_bruteforce(cfg, gamma, cond=None, null_dist=None):
    """Exact E_null[K(A[D, X~])]."""
    outcomes = dataset_outcomes(cfg, cond=cond, null_dist=null_dist)
    probs = np.array([p for p, _ in outcomes])
    ones = np.array([k for _, k in outcomes])
    return float((probs * _scores_from_counts(ones, cfg.N, gamma)).sum())


def population_e_value(predictions, cfg, gamma, cond=None):
    """K(predictions) / E_null[K]: the imputed statistic with the exact denominator."""
    predictions = np.asarray(predictions)
    ones = int(predictions.sum())
    return float(_scores_from_counts(ones, predictions.size, gamma)) / expected_K_bruteforce(cfg, gamma, cond=cond)
