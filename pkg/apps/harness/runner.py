"""
Monte-Carlo execution of an experiment.

One trial runs every computed process for ``cfg.steps`` steps on a shared
stream of batches. All randomness of trial i, step t comes from
``RngHandle(cfg.seed, stream=i).derive(t, role)``, so a trial's trace does
not depend on how trials are spread over workers.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from baselines.likelihood_ratio import ConditionalKT, KTEstimator, lr_conditional_step, lr_step
from baselines.ppi import PpiState, ppi_step
from classifiers.predictors import ConditionalEstimates
from combiner.portfolio import ConvexCombination, EProcessState, wealth_update
from core.rng import RngHandle
from core.sampling import sample_labeled, sample_unlabeled
from harness.constants import (
    COMBINED_PROCESSES, CONV_ALL, IMPUTED, LR_X, LR_Y, LR_Y_GIVEN_X, PPI, PPI_LABELED_ONLY, PPI_ONE_SIDED,
    ROLE_IMPUTED, ROLE_LABELED, ROLE_NULL_ESTIMATE, ROLE_PPI, ROLE_PPI_LABELED_ONLY, ROLE_PPI_ONE_SIDED,
    ROLE_UNLABELED,
)
from imputed.process import ImputedProcess
from robustness.estimation import NullEstimator

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TrialTrace:
    """Per-step record of one trial; arrays are indexed by step - 1."""
    trial_index: int
    steps: int
    e_values: Dict[str, np.ndarray]
    log_wealth: Dict[str, np.ndarray]
    stopped_at: Dict[str, Optional[int]]
    weights: Dict[str, np.ndarray] = field(default_factory=dict)
    weight_members: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    gamma: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        for name, values in self.e_values.items():
            if len(values) != self.steps or len(self.log_wealth[name]) != self.steps:
                raise ValueError(f"Trace of {name} does not cover {self.steps} steps.")

    @property
    def processes(self):
        return tuple(self.e_values)

    def rejected_by_step(self, name):
        """Boolean array: has the process rejected at or before each step."""
        stop = self.stopped_at[name]
        steps = np.arange(1, self.steps + 1)
        if stop is None:
            return np.zeros(self.steps, dtype=bool)
        return steps >= stop

    def to_frame(self):
        """
        Long format, one row per (step, process). ``gamma`` is filled on the
        imputed rows and ``weight_<member>`` on the rows of each combination.
        """
        steps = np.arange(1, self.steps + 1)
        members = list(dict.fromkeys(m for names in self.weight_members.values() for m in names))
        frames = []
        for name in self.processes:
            frame = pd.DataFrame({
                "trial": self.trial_index,
                "step": steps,
                "process": name,
                "e_value": self.e_values[name],
                "log_wealth": self.log_wealth[name],
                "gamma": self.gamma if name == IMPUTED else np.nan,
            })
            for member in members:
                frame[f"weight_{member}"] = np.nan
            for j, member in enumerate(self.weight_members.get(name, ())):
                frame[f"weight_{member}"] = self.weights[name][:, j]
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)


class _SingleProcess:
    def __init__(self, alpha):
        self.state = EProcessState(alpha=alpha)
        self.e_values = []
        self.log_wealth = []

    def record(self, e):
        self.state = wealth_update(self.state, e)
        self.e_values.append(float(e))
        self.log_wealth.append(self.state.log_wealth)


def run_trial(cfg, trial_index):
    computed = cfg.computed_processes
    root = RngHandle(cfg.seed, stream=trial_index)
    null = cfg.null_dist
    theta_null = null.theta_y
    exact_cond = ConditionalEstimates.exact(null)

    imputed = ImputedProcess(cfg.imputed_config(), tuner=cfg.tuner(), pool_null_data=not cfg.estimated_null)
    estimator = NullEstimator(null, cfg.regime, cfg.M1, cfg.M2) if cfg.estimated_null else None
    kt_y, kt_x, kt_y_given_x = KTEstimator(), KTEstimator(), ConditionalKT()
    ppi_kwargs = dict(classifier=cfg.classifier, tau=cfg.tau, gradient=cfg.ons_gradient)
    ppi_states = {
        PPI: PpiState(**ppi_kwargs),
        PPI_ONE_SIDED: PpiState(one_sided=True, **ppi_kwargs),
        PPI_LABELED_ONLY: PpiState(labeled_only=True, **ppi_kwargs),
    }
    ppi_roles = {PPI: ROLE_PPI, PPI_ONE_SIDED: ROLE_PPI_ONE_SIDED, PPI_LABELED_ONLY: ROLE_PPI_LABELED_ONLY}

    singles = {name: _SingleProcess(cfg.alpha) for name in computed if name not in COMBINED_PROCESSES}
    combos = {name: ConvexCombination(cfg.combination_members(name), cfg.alpha, cfg.eg_eta)
              for name in computed if name in COMBINED_PROCESSES}
    combo_e_values = {name: [] for name in combos}
    combo_log_wealth = {name: [] for name in combos}
    combo_weights = {name: [] for name in combos}

    for step in range(1, cfg.steps + 1):
        labeled = sample_labeled(cfg.alt_dist, cfg.n, root.derive(step, ROLE_LABELED))
        unlabeled = sample_unlabeled(cfg.alt_dist, cfg.N, root.derive(step, ROLE_UNLABELED))
        evalues = {}

        if IMPUTED in singles:
            if estimator is not None:
                estimate = estimator.refresh(root.derive(step, ROLE_NULL_ESTIMATE))
                evalues[IMPUTED], _ = imputed.step(labeled, unlabeled, root.derive(step, ROLE_IMPUTED),
                                                   null_dist=estimate, cond=estimator.conditional_estimates())
            else:
                evalues[IMPUTED], _ = imputed.step(labeled, unlabeled, root.derive(step, ROLE_IMPUTED))
        if LR_Y in singles:
            evalues[LR_Y], kt_y = lr_step(labeled.ys, theta_null, kt_y)
        if LR_X in singles:
            evalues[LR_X], kt_x = lr_step(np.concatenate([labeled.xs, unlabeled.xs]), null.theta_x, kt_x)
        if LR_Y_GIVEN_X in singles:
            evalues[LR_Y_GIVEN_X], kt_y_given_x = lr_conditional_step(
                labeled, (null.p_y1_given_x(0), null.p_y1_given_x(1)), kt_y_given_x)
        for name in ppi_states:
            if name in singles:
                generator = root.derive(step, ppi_roles[name]).generator()
                evalues[name], ppi_states[name] = ppi_step(
                    labeled, unlabeled, ppi_states[name], theta_null, generator=generator, cond=exact_cond)

        for name, single in singles.items():
            single.record(evalues[name])
        for name, combo in combos.items():
            combined, used = combo.step(evalues)
            combo_e_values[name].append(float(combined))
            combo_log_wealth[name].append(combo.state.log_wealth)
            combo_weights[name].append(used.w)

    e_values, log_wealth, stopped_at = {}, {}, {}
    for name in cfg.processes:
        if name in combos:
            e_values[name] = np.array(combo_e_values[name])
            log_wealth[name] = np.array(combo_log_wealth[name])
            stopped_at[name] = combos[name].state.stopped_at
        else:
            e_values[name] = np.array(singles[name].e_values)
            log_wealth[name] = np.array(singles[name].log_wealth)
            stopped_at[name] = singles[name].state.stopped_at
    return TrialTrace(
        trial_index=trial_index,
        steps=cfg.steps,
        e_values=e_values,
        log_wealth=log_wealth,
        stopped_at=stopped_at,
        weights={name: np.array(combo_weights[name]) for name in combos},
        weight_members={name: combo.members for name, combo in combos.items()},
        gamma=np.array(imputed.gamma_trace),
    )


@dataclass(frozen=True, eq=False)
class PowerCurve:
    """
    Rejection rate by step for every process, with binomial standard errors,
    plus e-value summaries over all trials and steps.
    """
    table: pd.DataFrame
    trials: int
    metadata: Dict[str, object] = field(default_factory=dict)
    e_value_summary: Dict[str, Dict[str, float]] = field(default_factory=dict)

    @property
    def processes(self):
        return tuple(self.table["process"].unique())

    def for_process(self, name):
        frame = self.table[self.table["process"] == name]
        return frame[["step", "rejection_rate", "std_err"]].reset_index(drop=True)

    def rates(self, name):
        return self.for_process(name)["rejection_rate"].to_numpy()

    def final_rate(self, name):
        return float(self.rates(name)[-1])

    def rate_at(self, name, step):
        return float(self.rates(name)[step - 1])

    @classmethod
    def from_traces(cls, traces, metadata=None):
        traces = sorted(traces, key=lambda t: t.trial_index)
        trials = len(traces)
        processes = traces[0].processes
        steps = traces[0].steps
        frames = []
        summary = {}
        for name in processes:
            rejected = np.stack([t.rejected_by_step(name) for t in traces])
            rate = rejected.mean(axis=0)
            frames.append(pd.DataFrame({
                "process": name,
                "step": np.arange(1, steps + 1),
                "rejection_rate": rate,
                "std_err": np.sqrt(rate * (1.0 - rate) / trials),
            }))
            e = np.concatenate([t.e_values[name] for t in traces])
            summary[name] = {
                "mean_e_value": float(e.mean()),
                "std_err": float(e.std(ddof=1) / math.sqrt(e.size)) if e.size > 1 else 0.0,
            }
        return cls(pd.concat(frames, ignore_index=True), trials, dict(metadata or {}), summary)


def run_trials(cfg, workers=1):
    """Every trial of ``cfg`` in trial order; ``workers`` follows joblib's n_jobs."""
    logger.info("running %s: %d trials x %d steps, processes %s, workers=%s",
                cfg.name, cfg.trials, cfg.steps, ",".join(cfg.processes), workers)
    if workers == 1:
        traces = [run_trial(cfg, i) for i in range(cfg.trials)]
    else:
        traces = Parallel(n_jobs=workers)(delayed(run_trial)(cfg, i) for i in range(cfg.trials))
    return list(traces)


def run_experiment(cfg, workers=1):
    traces = run_trials(cfg, workers=workers)
    curve = PowerCurve.from_traces(traces, metadata=experiment_metadata(cfg))
    for name in curve.processes:
        logger.info("%s: final rejection rate %.4f", name, curve.final_rate(name))
    return curve


def experiment_metadata(cfg):
    return {
        "name": cfg.name,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "trials": cfg.trials,
        "steps": cfg.steps,
    }


def validity_envelope(alpha, trials, bound=None):
    """Largest final rejection rate a valid test passes with: alpha + 2 SE (+ TV bound)."""
    return alpha + 2.0 * math.sqrt(alpha * (1.0 - alpha) / trials) + (bound or 0.0)


def rejection_summary(curve, cfg, bound=None):
    """
    (process, final rate, envelope, passed) rows of a null-data run. ``bound``
    widens the envelope of the processes that run on an estimated null.
    """
    rows = []
    for name in curve.processes:
        extra = bound if name in (IMPUTED, CONV_ALL) else None
        envelope = validity_envelope(cfg.alpha, curve.trials, extra)
        rate = curve.final_rate(name)
        rows.append((name, rate, envelope, rate <= envelope))
    return rows


def traces_frame(traces):
    return pd.concat([t.to_frame() for t in traces], ignore_index=True)