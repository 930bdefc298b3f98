"""
Experiment config files.

A config is a JSON object. Keys (all optional unless marked):

    regime            "label_shift" | "concept_shift"                 (required)
    null              regime parameters of the null                    (required)
                        label shift:   theta_y, p_x1_given_y0, p_x1_given_y1
                        concept shift: theta_x, theta_y_given_x0, theta_y_given_x1
    alternative       same keys; defaults to the null (a null-data run)
    n, N, M           labeled / unlabeled batch sizes, null datasets per step
    steps, trials     run length and Monte-Carlo repetitions
    alpha             test level
    processes         list (or comma string) of process names; default all
    classifier        "threshold" | "bayes"; default by regime
    tau               threshold of the threshold rule
    gamma_init, gamma_lr, gamma_min, gamma_max     score tuner
    eg_eta            learning rate of the combinations
    ons_gradient      "centered" | "literal"
    conv_ppi_variant  "two_sided" | "one_sided"
    null_hypothesis   "simple" | "composite"
    null_mode         "exact" | "estimated"
    M1, M2, delta     null samples per step and confidence of the reported bound
    seed              master seed
    description       free text carried into the manifest

Nested ``null`` / ``alternative`` objects are flattened to ``null_<param>``
and ``alternative_<param>``, which is also the form the overrides use.
"""
from django import forms
from django.conf import settings

from baselines.constants import ONS_GRADIENTS
from classifiers.classifier_kind import ClassifierKind
from core.distributions import REGIME_PARAMETERS, joint_from_regime
from core.exceptions import InferenceError
from core.shift_regime import ShiftRegime
from harness.config import ExperimentConfig
from harness.constants import ALL_PROCESSES, CONV_PPI_VARIANTS, NULL_HYPOTHESES, NULL_MODES

DIST_PREFIXES = ("null", "alternative")
PARAMETER_NAMES = sorted({name for names in REGIME_PARAMETERS.values() for name in names})


def _choices(values):
    return [(v, v) for v in values]


def flatten_config(data):
    """Flatten nested ``null`` / ``alternative`` objects into prefixed keys."""
    flat = {}
    for key, value in data.items():
        if key in DIST_PREFIXES and isinstance(value, dict):
            for param, param_value in value.items():
                flat[f"{key}_{param}"] = param_value
        else:
            flat[key] = value
    return flat


class ExperimentConfigForm(forms.Form):
    name = forms.CharField(required=False, max_length=200)
    description = forms.CharField(required=False, max_length=1000)
    regime = forms.ChoiceField(choices=_choices(r.value for r in ShiftRegime))
    n = forms.IntegerField(required=False, min_value=1)
    N = forms.IntegerField(required=False, min_value=1)
    M = forms.IntegerField(required=False, min_value=1)
    steps = forms.IntegerField(required=False, min_value=1)
    trials = forms.IntegerField(required=False, min_value=1)
    alpha = forms.FloatField(required=False, min_value=0.0, max_value=1.0)
    processes = forms.Field(required=False)
    classifier = forms.ChoiceField(required=False, choices=_choices(k.value for k in ClassifierKind))
    tau = forms.FloatField(required=False)
    gamma_init = forms.FloatField(required=False)
    gamma_lr = forms.FloatField(required=False)
    gamma_min = forms.FloatField(required=False)
    gamma_max = forms.FloatField(required=False)
    eg_eta = forms.FloatField(required=False)
    ons_gradient = forms.ChoiceField(required=False, choices=_choices(ONS_GRADIENTS))
    conv_ppi_variant = forms.ChoiceField(required=False, choices=_choices(CONV_PPI_VARIANTS))
    null_hypothesis = forms.ChoiceField(required=False, choices=_choices(NULL_HYPOTHESES))
    null_mode = forms.ChoiceField(required=False, choices=_choices(NULL_MODES))
    M1 = forms.IntegerField(required=False, min_value=1)
    M2 = forms.IntegerField(required=False, min_value=1)
    delta = forms.FloatField(required=False)
    seed = forms.IntegerField(required=False, min_value=0)

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        for prefix in DIST_PREFIXES:
            for param in PARAMETER_NAMES:
                self.fields[f"{prefix}_{param}"] = forms.FloatField(required=False, min_value=0.0, max_value=1.0)

    def clean_alpha(self):
        alpha = self.cleaned_data['alpha']
        if alpha is None:
            return settings.VALIDITY_ALPHA
        if alpha <= 0.0:
            raise forms.ValidationError("alpha must be positive.")
        return alpha

    def clean_delta(self):
        delta = self.cleaned_data['delta']
        if delta is not None and not 0.0 < delta < 1.0:
            raise forms.ValidationError("delta must lie in (0, 1).")
        return delta

    def clean_processes(self):
        processes = self.cleaned_data['processes']
        if processes in (None, "", []):
            return ()
        if isinstance(processes, str):
            processes = [p.strip() for p in processes.split(",") if p.strip()]
        if not isinstance(processes, (list, tuple)):
            raise forms.ValidationError("processes must be a list of names.")
        unknown = [p for p in processes if p not in ALL_PROCESSES]
        if unknown:
            raise forms.ValidationError(f"Unknown processes {unknown}; choose from {list(ALL_PROCESSES)}.")
        return tuple(processes)

    def _distribution(self, regime, prefix, required):
        names = REGIME_PARAMETERS[regime]
        values = [self.cleaned_data.get(f"{prefix}_{name}") for name in names]
        if all(v is None for v in values) and not required:
            return None
        missing = [f"{prefix}.{name}" for name, v in zip(names, values) if v is None]
        if missing:
            raise forms.ValidationError(f"Missing {', '.join(missing)} for {regime.value}.")
        try:
            return joint_from_regime(regime, values)
        except InferenceError as e:
            raise forms.ValidationError(e.message)

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        regime = ShiftRegime.parse(cleaned_data['regime'])
        null_dist = self._distribution(regime, "null", required=True)
        alt_dist = self._distribution(regime, "alternative", required=False) or null_dist

        scale = settings.DESK_SCALE
        values = {
            "regime": regime,
            "null_dist": null_dist,
            "alt_dist": alt_dist,
            "trials": scale["trials"],
            "steps": scale["steps"],
            "M": scale["M"],
        }
        for name in self.base_fields:
            if name in ("regime",):
                continue
            value = cleaned_data.get(name)
            if value not in (None, "", ()):
                values[name] = value
        try:
            self.experiment = ExperimentConfig(**values)
        except InferenceError as e:
            raise forms.ValidationError(e.message)
        return cleaned_data

    def to_config(self):
        if not self.is_valid():
            raise ValueError("to_config() needs a valid form.")
        return self.experiment
