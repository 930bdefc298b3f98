"""
Resolved experiment configuration.

``ExperimentConfig`` is what every trial runs from. It is built either by the
scenario catalog or by ``ExperimentConfigForm`` from a JSON file plus
overrides; both paths end in ``__post_init__``, which re-checks the
invariants (in particular that the alternative keeps the factor of the joint
law the regime holds fixed).
"""
import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from baselines.constants import ONS_GRADIENTS
from classifiers.classifier_kind import ClassifierKind
from classifiers.constants import DEFAULT_TAU
from combiner.constants import EG_ETA
from core.distributions import JointBernoulli
from core.exceptions import ConfigError
from core.shift_regime import ShiftRegime
from harness.constants import (
    ALL_PROCESSES, COMBINED_PROCESSES, CONV_ALL, CONV_BASELINES, CONV_PPI_ONE_SIDED, CONV_PPI_TWO_SIDED,
    CONV_PPI_VARIANTS, DEFAULT_ALPHA, DEFAULT_DELTA, DEFAULT_N, DEFAULT_NULL_SAMPLES, DEFAULT_STEPS,
    DEFAULT_TRIALS, DEFAULT_n, IMPUTED, LR_X, LR_Y, LR_Y_GIVEN_X, NULL_HYPOTHESES, NULL_MODE_ESTIMATED,
    NULL_MODE_EXACT, NULL_MODES, PPI, PPI_LABELED_ONLY, PPI_ONE_SIDED, REGIME_LR_PROCESSES,
)
from imputed.constants import ADAGRAD_LR, FAST_M, GAMMA_INIT, GAMMA_MAX, GAMMA_MIN
from imputed.statistic import ImputedConfig
from imputed.tuning import GammaTunerState
from robustness.bounds import TvBoundInputs, sequence_tv_bound

# the rule each regime's statistic is built around
DEFAULT_CLASSIFIERS = {
    ShiftRegime.LABEL_SHIFT: ClassifierKind.THRESHOLD,
    ShiftRegime.CONCEPT_SHIFT: ClassifierKind.BAYES,
}


def processes_for_regime(regime):
    """Every process that can run under ``regime``, in report order."""
    regime = ShiftRegime.parse(regime)
    lr = REGIME_LR_PROCESSES[regime.value]
    return tuple(p for p in ALL_PROCESSES if p not in (LR_X, LR_Y_GIVEN_X) or p in lr)


@dataclass(frozen=True)
class ExperimentConfig:
    regime: ShiftRegime
    null_dist: JointBernoulli
    alt_dist: JointBernoulli
    name: str = "custom"
    n: int = DEFAULT_n
    N: int = DEFAULT_N
    M: int = FAST_M
    steps: int = DEFAULT_STEPS
    trials: int = DEFAULT_TRIALS
    alpha: float = DEFAULT_ALPHA
    processes: Tuple[str, ...] = ()
    classifier: Optional[ClassifierKind] = None
    tau: float = DEFAULT_TAU
    gamma_init: float = GAMMA_INIT
    gamma_lr: float = ADAGRAD_LR
    gamma_min: float = GAMMA_MIN
    gamma_max: float = GAMMA_MAX
    eg_eta: float = EG_ETA
    ons_gradient: str = "centered"
    conv_ppi_variant: str = CONV_PPI_TWO_SIDED
    null_hypothesis: str = "simple"
    null_mode: str = NULL_MODE_EXACT
    M1: int = DEFAULT_NULL_SAMPLES
    M2: int = DEFAULT_NULL_SAMPLES
    delta: float = DEFAULT_DELTA
    seed: int = 0
    description: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "regime", ShiftRegime.parse(self.regime))
        classifier = DEFAULT_CLASSIFIERS[self.regime] if self.classifier is None else self.classifier
        object.__setattr__(self, "classifier", ClassifierKind.parse(classifier))
        available = processes_for_regime(self.regime)
        processes = tuple(self.processes) or available
        unknown = [p for p in processes if p not in available]
        if unknown:
            raise ConfigError(f"Processes {unknown} cannot run under {self.regime.value}; "
                              f"choose from {list(available)}.")
        # report order, no duplicates
        object.__setattr__(self, "processes", tuple(p for p in available if p in processes))

        for name in ("n", "N", "M", "steps", "trials", "M1", "M2"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}.")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}.")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}.")
        if self.ons_gradient not in ONS_GRADIENTS:
            raise ConfigError(f"ons_gradient must be one of {ONS_GRADIENTS}.")
        if self.conv_ppi_variant not in CONV_PPI_VARIANTS:
            raise ConfigError(f"conv_ppi_variant must be one of {CONV_PPI_VARIANTS}.")
        if self.null_hypothesis not in NULL_HYPOTHESES:
            raise ConfigError(f"null_hypothesis must be one of {NULL_HYPOTHESES}.")
        if self.null_mode not in NULL_MODES:
            raise ConfigError(f"null_mode must be one of {NULL_MODES}.")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}.")
        if not self.alt_dist.shares_fixed_factor(self.null_dist, self.regime):
            fixed = "P(X|Y)" if self.regime is ShiftRegime.LABEL_SHIFT else "P(X)"
            raise ConfigError(f"The alternative must keep the null's {fixed} under {self.regime.value}.")
        for name, value in self._baseline_null_parameters():
            if not 0.0 < value < 1.0:
                raise ConfigError(f"The null's {name} must lie strictly inside (0, 1) for the baselines, "
                                  f"got {value}.")
        # the tuner and the statistic validate their own ranges
        self.tuner()
        self.imputed_config()

    def _baseline_null_parameters(self):
        """Null Bernoulli parameters the computed baselines bet against."""
        computed = self.computed_processes
        null = self.null_dist
        params = []
        if any(p in computed for p in (LR_Y, PPI, PPI_ONE_SIDED, PPI_LABELED_ONLY)):
            params.append(("theta_y", null.theta_y))
        if LR_X in computed:
            params.append(("theta_x", null.theta_x))
        if LR_Y_GIVEN_X in computed:
            params.append(("theta_y_given_x0", null.p_y1_given_x(0)))
            params.append(("theta_y_given_x1", null.p_y1_given_x(1)))
        return params

    # which e-values a step must compute

    @property
    def ppi_member(self):
        return PPI_ONE_SIDED if self.conv_ppi_variant == CONV_PPI_ONE_SIDED else PPI

    def combination_members(self, name):
        baselines = REGIME_LR_PROCESSES[self.regime.value] + (self.ppi_member,)
        if name == CONV_BASELINES:
            return baselines
        if name == CONV_ALL:
            return baselines + (IMPUTED,)
        raise ConfigError(f"{name!r} is not a combined process.")

    @property
    def computed_processes(self):
        """Enabled processes plus the members their combinations need."""
        needed = set(self.processes)
        for name in self.processes:
            if name in COMBINED_PROCESSES:
                needed.update(self.combination_members(name))
        return tuple(p for p in processes_for_regime(self.regime) if p in needed)

    @property
    def estimated_null(self):
        return self.null_mode == NULL_MODE_ESTIMATED

    def imputed_config(self):
        return ImputedConfig(
            M=self.M, regime=self.regime, null_dist=self.null_dist,
            classifier=self.classifier, n=self.n, N=self.N, tau=self.tau,
        )

    def tuner(self):
        return GammaTunerState(gamma=self.gamma_init, lr=self.gamma_lr,
                               gamma_min=self.gamma_min, gamma_max=self.gamma_max)

    def for_null_data(self):
        """The same experiment with data drawn from the null."""
        return replace(self, alt_dist=self.null_dist)

    def tv_bound(self):
        """Type-I inflation bound of the estimated-null mode; None in exact mode."""
        if not self.estimated_null:
            return None
        return sequence_tv_bound(TvBoundInputs(
            t=self.steps, n=self.n, N=self.N, M1=self.M1, M2=self.M2, delta=self.delta))

    def to_dict(self):
        """Flat key schema accepted by ``ExperimentConfigForm``."""
        data = {
            "name": self.name,
            "regime": self.regime.value,
        }
        for prefix, dist in (("null", self.null_dist), ("alternative", self.alt_dist)):
            for param, value in dist.to_dict(self.regime).items():
                data[f"{prefix}_{param}"] = value
        data.update({
            "n": self.n,
            "N": self.N,
            "M": self.M,
            "steps": self.steps,
            "trials": self.trials,
            "alpha": self.alpha,
            "processes": list(self.processes),
            "classifier": self.classifier.value,
            "tau": self.tau,
            "gamma_init": self.gamma_init,
            "gamma_lr": self.gamma_lr,
            "gamma_min": self.gamma_min,
            "gamma_max": self.gamma_max,
            "eg_eta": self.eg_eta,
            "ons_gradient": self.ons_gradient,
            "conv_ppi_variant": self.conv_ppi_variant,
            "null_hypothesis": self.null_hypothesis,
            "null_mode": self.null_mode,
            "M1": self.M1,
            "M2": self.M2,
            "delta": self.delta,
            "seed": self.seed,
            "description": self.description,
        })
        return data

    def config_hash(self):
        data = self.to_dict()
        # the description is left out of the hash
        data.pop("description")
        payload = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
