import logging

from classifiers.classifier_kind import ClassifierKind
from classifiers.predictors import ConditionalEstimates
from imputed.statistic import imputed_e_step
from imputed.tuning import GammaTunerState, adagrad_update

logger = logging.getLogger(__name__)


class ImputedProcess:
    """
    Sequential driver of the imputed e-statistic for one trial.

    gamma for step t is fixed before step t is observed; the gradient from
    step t then moves it for step t + 1. The threshold rule's P(X|Y)
    estimate pools the labeled null datasets of earlier steps only.
    """

    def __init__(self, cfg, tuner=None, cond=None, pool_null_data=True):
        self.cfg = cfg
        self.tuner = tuner or GammaTunerState()
        self.cond = cond or ConditionalEstimates.empty()
        self.pool_null_data = pool_null_data
        self.gamma_trace = []

    def step(self, labeled, unlabeled, rng, null_dist=None, cond=None):
        params = self.tuner.score_params()
        e_value, diagnostics = imputed_e_step(
            (labeled, unlabeled), self.cfg, params,
            cond=cond or self.cond, rng=rng, null_dist=null_dist,
        )
        self.gamma_trace.append(params.gamma)
        self.tuner = adagrad_update(self.tuner, diagnostics.gradient())
        if self.pool_null_data and self.cfg.classifier is ClassifierKind.THRESHOLD and self.cfg.M > 0:
            self.cond = self.cond.pooled_with(diagnostics.null_xs, diagnostics.null_ys)
        return e_value, diagnostics
