import json
import logging
import subprocess
from enum import Enum
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.serializers.json import DjangoJSONEncoder

from core.exceptions import ConfigError
from harness.forms import ExperimentConfigForm, flatten_config
from harness.scenarios import get_scenario

logger = logging.getLogger(__name__)

POWER_FILE = "power_{process}.csv"
MANIFEST_FILE = "manifest.json"
TRACES_FILE = "traces.csv"
CSV_FLOAT_FORMAT = "%.12g"


class ManifestEncoder(DjangoJSONEncoder):
    """JSON for run manifests: numpy scalars and enums on top of Django's types."""

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, Enum):
            return o.value
        return super().default(o)


def parse_overrides(pairs):
    """
    ``["trials=10", "null.theta_y=0.4"]`` -> ``{"trials": "10", "null_theta_y": "0.4"}``.
    Values stay strings; the form coerces them.
    """
    overrides = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"Override {pair!r} is not of the form key=value.")
        overrides[key.replace(".", "_").replace("-", "_")] = value.strip()
    return overrides


def read_config_source(source):
    """
    Raw flat config data from a catalog scenario name or a JSON file path.
    """
    scenario = get_scenario(source)
    if scenario is not None:
        return scenario.to_dict()
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"{source!r} is neither a built-in scenario nor a readable file.")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object.")
    data = flatten_config(data)
    data.setdefault("name", path.stem)
    return data


def load_config(source, overrides=None, scale=None):
    """
    Resolve ``source`` plus overrides into an ExperimentConfig. ``scale``
    (e.g. ``settings.PAPER_SCALE``) replaces trials, steps and M before
    the explicit overrides are applied.
    """
    data = read_config_source(source)
    if scale:
        data.update(scale)
    data.update(overrides or {})
    form = ExperimentConfigForm(data)
    if not form.is_valid():
        problems = []
        for field, errors in form.errors.items():
            label = "config" if field == "__all__" else field
            problems.extend(f"{label}: {error}" for error in errors)
        raise ConfigError("; ".join(problems))
    return form.to_config()


def git_revision():
    try:
        result = subprocess.run(
            ["git", "rev-parse", "HEAD"], cwd=settings.BASE_DIR,
            capture_output=True, text=True, check=True, timeout=10,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return result.stdout.strip() or "unknown"


def output_directory(path=None):
    directory = Path(path or settings.SIMULATION_OUTPUT_DIR)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def write_power_curves(curve, directory):
    written = []
    for name in curve.processes:
        path = Path(directory) / POWER_FILE.format(process=name)
        curve.for_process(name).to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        written.append(path)
    return written


def write_traces(frame, directory):
    path = Path(directory) / TRACES_FILE
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return path


def build_manifest(cfg, curve, workers, bound=None):
    return {
        "config": cfg.to_dict(),
        "description": cfg.description,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "git_revision": git_revision(),
        "workers": workers,
        "null_joint": cfg.null_dist.to_dict(),
        "alternative_joint": cfg.alt_dist.to_dict(),
        "e_value_summary": curve.e_value_summary,
        "final_rejection_rates": {name: curve.final_rate(name) for name in curve.processes},
        "tv_bound": bound,
    }


def write_manifest(manifest, directory):
    path = Path(directory) / MANIFEST_FILE
    path.write_text(json.dumps(manifest, cls=ManifestEncoder, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("manifest written to %s", path)
    return path
