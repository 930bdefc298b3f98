import json
import math
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, tag

from classifiers.classifier_kind import ClassifierKind
from core.distributions import joint_from_concept_shift, joint_from_label_shift, phi_correlation
from core.exceptions import ConfigError, SizeError
from core.rng import RngHandle
from core.shift_regime import ShiftRegime
from harness.config import ExperimentConfig, processes_for_regime
from harness.constants import (
    CONV_ALL, CONV_BASELINES, IMPUTED, LR_X, LR_Y, LR_Y_GIVEN_X, PPI, PPI_LABELED_ONLY, PPI_ONE_SIDED,
)
from harness.forms import ExperimentConfigForm, flatten_config
from harness.oracles import (
    brute_force_mean_e, expected_k, monte_carlo_mean_e, population_mean_e, ppi_mean_payoff,
)
from harness.runner import PowerCurve, rejection_summary, run_experiment, run_trial, run_trials, traces_frame
from harness.scenarios import paper_scenarios
from harness.utils import (
    ManifestEncoder, build_manifest, load_config, parse_overrides, write_power_curves,
)

LABEL_NULL = joint_from_label_shift(0.5, 0.35, 0.65)
LABEL_ALT = joint_from_label_shift(0.52, 0.35, 0.65)
CONCEPT_NULL = joint_from_concept_shift(0.5, 0.4, 0.7)


def small_config(**kwargs):
    values = dict(regime="label_shift", null_dist=LABEL_NULL, alt_dist=LABEL_ALT,
                  n=5, N=10, M=4, steps=6, trials=3, seed=123)
    values.update(kwargs)
    return ExperimentConfig(**values)


class ScenarioTests(SimpleTestCase):

    def test_catalog_is_valid(self):
        catalog = paper_scenarios()
        self.assertEqual(len(catalog), 12)
        for name, cfg in catalog.items():
            self.assertEqual(cfg.name, name)
            self.assertTrue(cfg.alt_dist.shares_fixed_factor(cfg.null_dist, cfg.regime))

    def test_label_shift_low_correlation(self):
        cfg = paper_scenarios()["label_shift_low_corr_N30"]
        self.assertAlmostEqual(phi_correlation(cfg.null_dist), 0.3, places=12)
        self.assertAlmostEqual(cfg.alt_dist.theta_y, 0.52, places=12)
        self.assertEqual((cfg.n, cfg.N), (15, 30))
        self.assertIs(cfg.classifier, ClassifierKind.THRESHOLD)

    def test_concept_shift_alternatives(self):
        catalog = paper_scenarios()
        alt = catalog["concept_shift_low_corr"].alt_dist
        self.assertAlmostEqual(alt.p_y1_given_x(0), 0.42, places=12)
        self.assertAlmostEqual(alt.p_y1_given_x(1), 0.72, places=12)
        self.assertEqual(catalog["concept_shift_low_corr"].N, 135)
        alt = catalog["concept_shift_high_corr_non_monotone"].alt_dist
        self.assertAlmostEqual(alt.p_y1_given_x(0), 0.22, places=12)
        self.assertAlmostEqual(alt.p_y1_given_x(1), 0.83, places=12)

    def test_one_sided_ppi_variant(self):
        cfg = paper_scenarios()["label_shift_high_corr_N135_one_sided_ppi"]
        self.assertEqual(cfg.combination_members(CONV_BASELINES), (LR_Y, LR_X, PPI_ONE_SIDED))


class ExperimentConfigTests(SimpleTestCase):

    def test_regime_consistency(self):
        with self.assertRaises(ConfigError):
            small_config(alt_dist=joint_from_label_shift(0.52, 0.3, 0.65))
        with self.assertRaises(ConfigError):
            small_config(regime="concept_shift", null_dist=CONCEPT_NULL,
                         alt_dist=joint_from_concept_shift(0.55, 0.4, 0.7))

    def test_processes_per_regime(self):
        self.assertNotIn(LR_Y_GIVEN_X, processes_for_regime("label_shift"))
        self.assertNotIn(LR_X, processes_for_regime("concept_shift"))
        with self.assertRaises(ConfigError):
            small_config(processes=(LR_Y_GIVEN_X,))
        for regime in ("label_shift", "concept_shift"):
            self.assertIn(PPI_LABELED_ONLY, processes_for_regime(regime))

    def test_combinations_pull_in_members(self):
        cfg = small_config(processes=(CONV_ALL,))
        self.assertEqual(cfg.computed_processes, (IMPUTED, LR_Y, LR_X, PPI, CONV_ALL))
        self.assertEqual(cfg.processes, (CONV_ALL,))

    def test_counts_and_levels(self):
        for bad in (dict(steps=0), dict(trials=0), dict(alpha=0.0), dict(delta=1.0), dict(null_mode="guessed")):
            with self.assertRaises(ConfigError):
                small_config(**bad)

    def test_null_data_and_bound(self):
        cfg = small_config(null_mode="estimated", M1=200, M2=200)
        self.assertEqual(cfg.for_null_data().alt_dist, LABEL_NULL)
        self.assertGreater(cfg.tv_bound(), 0.0)
        self.assertIsNone(small_config().tv_bound())

    def test_hash_tracks_config(self):
        self.assertEqual(small_config().config_hash(), small_config().config_hash())
        self.assertNotEqual(small_config().config_hash(), small_config(seed=124).config_hash())
        self.assertEqual(small_config().config_hash(), small_config(description="notes").config_hash())

    def test_concept_shift_null_needs_open_conditionals(self):
        null = joint_from_concept_shift(0.5, 0.0, 0.7)
        alt = joint_from_concept_shift(0.5, 0.02, 0.72)
        with self.assertRaises(ConfigError) as cm:
            small_config(regime="concept_shift", null_dist=null, alt_dist=alt)
        self.assertIn("theta_y_given_x0", str(cm.exception))
        cfg = small_config(regime="concept_shift", null_dist=null, alt_dist=alt, processes=(IMPUTED, LR_Y))
        self.assertEqual(cfg.computed_processes, (IMPUTED, LR_Y))

    def test_label_shift_null_needs_open_covariate_rate(self):
        null = joint_from_label_shift(0.5, 0.0, 0.0)
        alt = joint_from_label_shift(0.52, 0.0, 0.0)
        with self.assertRaises(ConfigError) as cm:
            small_config(null_dist=null, alt_dist=alt)
        self.assertIn("theta_x", str(cm.exception))
        with self.assertRaises(ConfigError):
            small_config(null_dist=null, alt_dist=alt, processes=(CONV_BASELINES,))
        small_config(null_dist=null, alt_dist=alt, processes=(IMPUTED, LR_Y, PPI))


class ExperimentConfigFormTests(SimpleTestCase):

    def data(self, **kwargs):
        data = {
            "regime": "label_shift",
            "null_theta_y": 0.5, "null_p_x1_given_y0": 0.35, "null_p_x1_given_y1": 0.65,
            "alternative_theta_y": 0.52, "alternative_p_x1_given_y0": 0.35, "alternative_p_x1_given_y1": 0.65,
        }
        data.update(kwargs)
        return data

    def test_defaults_from_settings(self):
        form = ExperimentConfigForm(self.data())
        self.assertTrue(form.is_valid(), form.errors)
        cfg = form.to_config()
        self.assertEqual((cfg.trials, cfg.steps, cfg.M), (200, 300, 32))
        self.assertEqual(cfg.alpha, 0.05)
        self.assertAlmostEqual(cfg.alt_dist.theta_y, 0.52)

    def test_string_values_and_process_list(self):
        form = ExperimentConfigForm(self.data(trials="10", processes="imputed, lr_y", seed="7"))
        self.assertTrue(form.is_valid(), form.errors)
        cfg = form.to_config()
        self.assertEqual(cfg.trials, 10)
        self.assertEqual(cfg.processes, (IMPUTED, LR_Y))

    def test_missing_null_parameter(self):
        data = self.data()
        del data["null_p_x1_given_y1"]
        form = ExperimentConfigForm(data)
        self.assertFalse(form.is_valid())
        self.assertIn("null.p_x1_given_y1", str(form.errors))

    def test_alternative_defaults_to_null(self):
        data = {k: v for k, v in self.data().items() if not k.startswith("alternative")}
        form = ExperimentConfigForm(data)
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.to_config().alt_dist, form.to_config().null_dist)

    def test_inconsistent_alternative(self):
        form = ExperimentConfigForm(self.data(alternative_p_x1_given_y0=0.3))
        self.assertFalse(form.is_valid())
        self.assertIn("P(X|Y)", str(form.errors))

    def test_unknown_process(self):
        form = ExperimentConfigForm(self.data(processes=["imputed", "oracle"]))
        self.assertFalse(form.is_valid())
        self.assertIn("processes", form.errors)

    def test_scenario_round_trip(self):
        cfg = paper_scenarios()["concept_shift_high_corr"]
        form = ExperimentConfigForm(cfg.to_dict())
        self.assertTrue(form.is_valid(), form.errors)
        again = form.to_config()
        self.assertEqual((again.regime, again.N, again.processes), (cfg.regime, cfg.N, cfg.processes))
        self.assertTrue(cfg.description)
        self.assertEqual(again.description, cfg.description)
        np.testing.assert_allclose(again.alt_dist.cells(), cfg.alt_dist.cells(), atol=1e-12)

    def test_flatten(self):
        flat = flatten_config({"regime": "label_shift", "null": {"theta_y": 0.5}, "trials": 3})
        self.assertEqual(flat, {"regime": "label_shift", "null_theta_y": 0.5, "trials": 3})


class ConfigLoadingTests(SimpleTestCase):

    def test_overrides(self):
        self.assertEqual(parse_overrides(["trials=10", "null.theta_y=0.4"]),
                         {"trials": "10", "null_theta_y": "0.4"})
        with self.assertRaises(ConfigError):
            parse_overrides(["trials"])

    def test_scenario_with_overrides(self):
        cfg = load_config("label_shift_low_corr_N30", overrides={"trials": "10", "seed": "5"})
        self.assertEqual((cfg.trials, cfg.seed, cfg.name), (10, 5, "label_shift_low_corr_N30"))
        self.assertEqual(cfg.description, paper_scenarios()["label_shift_low_corr_N30"].description)

    def test_full_scale(self):
        cfg = load_config("concept_shift_low_corr", scale={"trials": 500, "steps": 500, "M": 128})
        self.assertEqual((cfg.trials, cfg.steps, cfg.M), (500, 500, 128))

    def test_json_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "tiny.json"
            path.write_text(json.dumps({
                "regime": "concept_shift",
                "null": {"theta_x": 0.5, "theta_y_given_x0": 0.4, "theta_y_given_x1": 0.7},
                "alternative": {"theta_x": 0.5, "theta_y_given_x0": 0.42, "theta_y_given_x1": 0.72},
                "steps": 4,
            }), encoding="utf-8")
            cfg = load_config(str(path), overrides={"alternative_theta_y_given_x1": "0.75"})
        self.assertEqual(cfg.name, "tiny")
        self.assertEqual(cfg.steps, 4)
        self.assertAlmostEqual(cfg.alt_dist.p_y1_given_x(1), 0.75)
        self.assertIs(cfg.classifier, ClassifierKind.BAYES)

    def test_bad_sources(self):
        with self.assertRaises(ConfigError):
            load_config("no_such_scenario_or_file")
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "broken.json"
            path.write_text("{not json", encoding="utf-8")
            with self.assertRaises(ConfigError):
                load_config(str(path))
            path.write_text(json.dumps({"regime": "label_shift"}), encoding="utf-8")
            with self.assertRaises(ConfigError):
                load_config(str(path))


class TrialTests(SimpleTestCase):

    def test_deterministic(self):
        cfg = small_config()
        a, b = run_trial(cfg, 1), run_trial(cfg, 1)
        for name in cfg.processes:
            np.testing.assert_array_equal(a.e_values[name], b.e_values[name])
        self.assertFalse(np.array_equal(a.e_values[IMPUTED], run_trial(cfg, 2).e_values[IMPUTED]))

    def test_trace_shapes_and_stop_times(self):
        cfg = small_config(steps=20, alpha=0.5)
        trace = run_trial(cfg, 0)
        self.assertEqual(trace.processes, cfg.processes)
        self.assertEqual(trace.weights[CONV_ALL].shape, (20, 4))
        self.assertEqual(len(trace.gamma), 20)
        threshold = math.log(1 / cfg.alpha)
        for name in cfg.processes:
            crossed = np.flatnonzero(trace.log_wealth[name] >= threshold)
            expected = int(crossed[0]) + 1 if crossed.size else None
            self.assertEqual(trace.stopped_at[name], expected)
            self.assertTrue((trace.e_values[name] >= 0).all())

    def test_log_wealth_is_running_sum(self):
        trace = run_trial(small_config(), 0)
        for name in (LR_Y, PPI, CONV_BASELINES):
            np.testing.assert_allclose(trace.log_wealth[name], np.cumsum(np.log(trace.e_values[name])))

    def test_concept_shift_and_estimated_null(self):
        cfg = small_config(regime="concept_shift", null_dist=CONCEPT_NULL,
                           alt_dist=joint_from_concept_shift(0.5, 0.42, 0.72),
                           null_mode="estimated", M1=20, M2=20)
        trace = run_trial(cfg, 0)
        self.assertIn(LR_Y_GIVEN_X, trace.processes)
        self.assertEqual(len(trace.e_values[IMPUTED]), cfg.steps)

    def test_null_run_mean_evalue(self):
        cfg = small_config(alt_dist=LABEL_NULL, processes=(IMPUTED,), steps=10, trials=150, M=8)
        curve = run_experiment(cfg)
        summary = curve.e_value_summary[IMPUTED]
        self.assertLess(abs(summary["mean_e_value"] - 1.0), 4 * summary["std_err"])


class PowerCurveTests(SimpleTestCase):

    def test_single_trial_curve(self):
        cfg = small_config(trials=1, steps=15, alpha=0.5)
        trace = run_trial(cfg, 0)
        curve = run_experiment(cfg)
        for name in cfg.processes:
            np.testing.assert_array_equal(curve.rates(name), trace.rejected_by_step(name).astype(float))
            self.assertTrue((curve.for_process(name)["std_err"] == 0).all())

    def test_rates_are_nondecreasing(self):
        curve = PowerCurve.from_traces(run_trials(small_config(trials=8, steps=12, alpha=0.5)))
        for name in curve.processes:
            rates = curve.rates(name)
            self.assertTrue((np.diff(rates) >= 0).all())
            se = curve.for_process(name)["std_err"].to_numpy()
            np.testing.assert_allclose(se, np.sqrt(rates * (1 - rates) / 8))

    def test_identical_csv_across_worker_counts(self):
        cfg = small_config(trials=4)
        outputs = []
        for workers in (1, 2):
            with tempfile.TemporaryDirectory() as tmp:
                curve = run_experiment(cfg, workers=workers)
                paths = write_power_curves(curve, tmp)
                outputs.append({p.name: p.read_bytes() for p in paths})
        self.assertEqual(outputs[0], outputs[1])
        self.assertIn("power_imputed.csv", outputs[0])
        self.assertTrue(outputs[0]["power_imputed.csv"].startswith(b"step,rejection_rate,std_err\n"))

    def test_traces_frame(self):
        cfg = small_config(trials=2, processes=(IMPUTED, LR_Y))
        frame = traces_frame(run_trials(cfg))
        self.assertEqual(list(frame.columns), ["trial", "step", "process", "e_value", "log_wealth", "gamma"])
        self.assertEqual(len(frame), 2 * 2 * cfg.steps)

    def test_trace_frame_carries_gamma_and_weights(self):
        trace = run_trial(small_config(), 0)
        frame = trace.to_frame()
        weight_columns = [f"weight_{name}" for name in (LR_Y, LR_X, PPI, IMPUTED)]
        self.assertEqual(list(frame.columns[6:]), weight_columns)

        imputed = frame[frame["process"] == IMPUTED]
        np.testing.assert_allclose(imputed["gamma"].to_numpy(), trace.gamma)
        self.assertEqual(imputed["gamma"].iloc[0], 1.0)
        self.assertTrue(frame.loc[frame["process"] != IMPUTED, "gamma"].isna().all())

        combined = frame[frame["process"] == CONV_ALL]
        np.testing.assert_allclose(combined[weight_columns].to_numpy(), trace.weights[CONV_ALL])
        np.testing.assert_allclose(combined[weight_columns].sum(axis=1).to_numpy(), 1.0)
        baselines = frame[frame["process"] == CONV_BASELINES]
        self.assertTrue(baselines["weight_imputed"].isna().all())
        np.testing.assert_allclose(baselines[weight_columns[:3]].sum(axis=1).to_numpy(), 1.0)
        self.assertTrue(frame.loc[frame["process"] == LR_Y, weight_columns].isna().all().all())

    def test_manifest_is_json(self):
        cfg = small_config(trials=2, null_mode="estimated")
        curve = run_experiment(cfg)
        manifest = json.loads(json.dumps(build_manifest(cfg, curve, 1, bound=cfg.tv_bound()), cls=ManifestEncoder))
        self.assertEqual(manifest["seed"], 123)
        self.assertEqual(manifest["config"]["trials"], 2)
        self.assertIn(IMPUTED, manifest["e_value_summary"])
        self.assertGreater(manifest["tv_bound"], 0)

    def test_envelope_rows(self):
        cfg = small_config(trials=4, alpha=1.0)
        rows = rejection_summary(run_experiment(cfg), cfg)
        self.assertTrue(all(passed for *_, passed in rows))


class OracleTests(SimpleTestCase):

    def test_exact_mean_is_one(self):
        for regime, null in ((ShiftRegime.LABEL_SHIFT, LABEL_NULL), (ShiftRegime.CONCEPT_SHIFT, CONCEPT_NULL)):
            for kind in ClassifierKind:
                for gamma in (0.5, 1.0, 3.0):
                    self.assertAlmostEqual(brute_force_mean_e(regime, null, kind, gamma), 1.0, delta=1e-10)

    def test_exact_mean_larger_instance(self):
        value = brute_force_mean_e("concept_shift", CONCEPT_NULL, "bayes", 1.0, n=1, N=2, M=2)
        self.assertAlmostEqual(value, 1.0, delta=1e-10)

    def test_degenerate_null(self):
        null = joint_from_label_shift(1.0, 0.3, 0.6)
        self.assertAlmostEqual(brute_force_mean_e("label_shift", null, "threshold", 2.0), 1.0, delta=1e-12)

    def test_budget(self):
        with self.assertRaises(SizeError):
            brute_force_mean_e("label_shift", LABEL_NULL, "bayes", 1.0, n=2, N=3, M=4)

    def test_monte_carlo_agrees(self):
        null = joint_from_label_shift(0.4, 0.3, 0.7)
        exact = brute_force_mean_e("label_shift", null, "bayes", 1.5)
        mean, se = monte_carlo_mean_e("label_shift", null, "bayes", 1.5, RngHandle(2718), 1_000_000)
        self.assertLess(abs(mean - exact), 3 * se)

    def test_population_and_ppi(self):
        self.assertAlmostEqual(population_mean_e("label_shift", LABEL_NULL, "bayes", 1.0, N=2), 1.0, delta=1e-10)
        self.assertAlmostEqual(ppi_mean_payoff(LABEL_NULL, 0.3, 0.5), 1.0, delta=1e-10)
        self.assertAlmostEqual(ppi_mean_payoff(CONCEPT_NULL, -0.5, 1.0, classifier="threshold", slice_size=3),
                               1.0, delta=1e-10)

    def test_expected_k_of_constant_predictor(self):
        null = joint_from_label_shift(1.0, 0.3, 0.6)
        self.assertAlmostEqual(expected_k("label_shift", null, "threshold", 1.0, N=2), 2 * math.e, places=12)


@tag("slow")
class ValiditySuiteTests(SimpleTestCase):
    """Null-data runs at desk scale: every process stays inside its envelope."""

    def check_null_run(self, cfg):
        cfg = replace(cfg, trials=200, steps=300, M=32, seed=2024).for_null_data()
        curve = run_experiment(cfg, workers=-1)
        for name, rate, envelope, passed in rejection_summary(curve, cfg, bound=cfg.tv_bound()):
            self.assertTrue(passed, f"{name}: {rate} > {envelope}")

    def test_label_shift(self):
        cfg = replace(paper_scenarios()["label_shift_low_corr_N30"],
                      processes=(IMPUTED, LR_Y, LR_X, PPI, PPI_ONE_SIDED, PPI_LABELED_ONLY, CONV_BASELINES,
                                 CONV_ALL))
        self.check_null_run(cfg)

    def test_concept_shift(self):
        self.check_null_run(paper_scenarios()["concept_shift_high_corr"])

    def test_estimated_null(self):
        cfg = replace(paper_scenarios()["label_shift_low_corr_N30"], null_mode="estimated", M1=200, M2=200,
                      processes=(IMPUTED,))
        self.check_null_run(cfg)


@tag("slow")
class PowerSuiteTests(SimpleTestCase):
    """Directional power checks on the built-in alternatives."""

    def check_power(self, name):
        cfg = replace(paper_scenarios()[name], trials=100, steps=500, M=32, seed=7,
                      processes=(IMPUTED, CONV_BASELINES, CONV_ALL))
        curve = run_experiment(cfg, workers=-1)
        summary = curve.e_value_summary[IMPUTED]
        self.assertGreater(summary["mean_e_value"] - 1.0, 3 * summary["std_err"])
        self.assertGreater(curve.final_rate(CONV_ALL), curve.final_rate(CONV_BASELINES))

    def test_label_shift(self):
        self.check_power("label_shift_low_corr_N30")

    def test_concept_shift(self):
        self.check_power("concept_shift_low_corr")

    def test_power_grows_with_null_datasets(self):
        base = replace(paper_scenarios()["label_shift_low_corr_N30"], trials=200, steps=300, seed=11,
                       processes=(IMPUTED,))
        previous = None
        for M in (4, 16, 32):
            curve = run_experiment(replace(base, M=M), workers=-1)
            rate = curve.rate_at(IMPUTED, 300)
            se = curve.for_process(IMPUTED)["std_err"].iloc[-1]
            if previous is not None:
                self.assertGreaterEqual(rate + se, previous)
            previous = rate

    def test_unlabeled_correction_does_not_cost_power(self):
        cfg = replace(paper_scenarios()["label_shift_high_corr_N135"], trials=100, steps=300, seed=13,
                      processes=(PPI, PPI_LABELED_ONLY))
        curve = run_experiment(cfg, workers=-1)
        se = math.hypot(curve.for_process(PPI)["std_err"].iloc[-1],
                        curve.for_process(PPI_LABELED_ONLY)["std_err"].iloc[-1])
        self.assertLessEqual(curve.final_rate(PPI_LABELED_ONLY), curve.final_rate(PPI) + 2 * se)
