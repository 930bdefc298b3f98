import json
import math
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

import pandas as pd
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from cli.constants import EXIT_ACCEPTANCE, EXIT_USAGE

FAST = ("--trials", "2", "--steps", "5", "--M", "4", "--workers", "1")


def run(*args):
    out = StringIO()
    call_command(*args, stdout=out)
    return out.getvalue()


class BoundCommandTests(SimpleTestCase):

    def test_closed_form(self):
        out = run("bound", "--t", "1", "--n", "1", "--N", "1", "--M1", "1", "--M2", "1", "--delta", "0.5")
        k_xy = 4 * math.log(2) + math.log(4)
        k_x = 2 * math.log(2) + math.log(4)
        self.assertAlmostEqual(float(out), 2 * (math.sqrt(k_xy / 2) + math.sqrt(k_x / 2)), delta=1e-12)

    def test_delta_out_of_range(self):
        with self.assertRaises(CommandError) as cm:
            run("bound", "--t", "10", "--n", "15", "--N", "30", "--M1", "200", "--M2", "200", "--delta", "1.0")
        self.assertEqual(cm.exception.returncode, EXIT_USAGE)

    def test_missing_argument(self):
        with self.assertRaises(CommandError) as cm:
            run("bound", "--t", "10")
        self.assertEqual(cm.exception.returncode, EXIT_USAGE)


class OracleCommandTests(SimpleTestCase):

    def test_imputed_mean(self):
        self.assertEqual(run("oracle", "imputed").strip(), "1.000000000")
        out = run("oracle", "imputed", "--regime", "concept_shift", "--gamma", "2.5", "--null", "0.3", "0.2", "0.9")
        self.assertEqual(out.strip(), "1.000000000")

    def test_ppi_mean(self):
        out = run("oracle", "ppi", "--lam", "0.4", "--epsilon", "0.8", "--N", "2", "--one-sided")
        self.assertEqual(out.strip(), "1.000000000")

    def test_expected_k_is_not_checked(self):
        value = float(run("oracle", "expected-k", "--N", "2", "--gamma", "0.5"))
        self.assertTrue(2.0 <= value <= 2 * math.exp(0.5))

    def test_oversize_instance(self):
        with self.assertRaises(CommandError) as cm:
            run("oracle", "imputed", "--classifier", "bayes", "--n", "4", "--N", "6")
        self.assertEqual(cm.exception.returncode, EXIT_USAGE)
        self.assertIn("limit", str(cm.exception))

    def test_out_of_tolerance(self):
        out = StringIO()
        with mock.patch("cli.management.commands.oracle.brute_force_mean_e", return_value=1.1):
            with self.assertRaises(CommandError) as cm:
                call_command("oracle", "imputed", stdout=out)
        self.assertEqual(cm.exception.returncode, EXIT_ACCEPTANCE)
        self.assertEqual(out.getvalue().strip(), "1.100000000")


class ScenariosCommandTests(SimpleTestCase):

    def test_listing(self):
        out = run("scenarios")
        self.assertEqual(len(out.strip().splitlines()), 12)
        line = next(l for l in out.splitlines() if l.startswith("label_shift_low_corr_N30 "))
        self.assertIn("phi=0.300", line)


class SimulateCommandTests(SimpleTestCase):

    def test_writes_curves_and_manifest(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = run("simulate", "label_shift_low_corr_N30", *FAST, "--output", tmp, "--traces")
            directory = Path(tmp)
            manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
            self.assertEqual(manifest["config"]["trials"], 2)
            self.assertEqual(manifest["config"]["M"], 4)
            self.assertEqual(manifest["workers"], 1)
            for name in ("imputed", "lr_y", "lr_x", "ppi", "ppi_one_sided", "ppi_labeled_only",
                         "conv_baselines", "conv_all"):
                lines = (directory / f"power_{name}.csv").read_text(encoding="utf-8").splitlines()
                self.assertEqual(lines[0], "step,rejection_rate,std_err")
                self.assertEqual(len(lines), 6)
            self.assertTrue(manifest["description"])
            traces = pd.read_csv(directory / "traces.csv")
            imputed = traces[traces["process"] == "imputed"]
            self.assertEqual(len(imputed), 2 * 5)
            self.assertFalse(imputed["gamma"].isna().any())
            combined = traces[traces["process"] == "conv_all"]
            self.assertFalse(combined["weight_imputed"].isna().any())
            self.assertTrue(traces.loc[traces["process"] == "conv_baselines", "weight_imputed"].isna().all())
        self.assertIn("final rejection rate", out)

    def test_reruns_are_byte_identical(self):
        outputs = []
        for _ in range(2):
            with tempfile.TemporaryDirectory() as tmp:
                run("simulate", "concept_shift_low_corr", *FAST, "--seed", "3", "--output", tmp)
                outputs.append({p.name: p.read_bytes() for p in sorted(Path(tmp).glob("power_*.csv"))})
        self.assertEqual(outputs[0], outputs[1])
        self.assertIn("power_lr_y_given_x.csv", outputs[0])

    def test_overrides(self):
        with tempfile.TemporaryDirectory() as tmp:
            run("simulate", "label_shift_low_corr_N30", *FAST, "--set", "processes=imputed,lr_y",
                "--set", "null_mode=estimated", "--output", tmp)
            manifest = json.loads((Path(tmp) / "manifest.json").read_text(encoding="utf-8"))
            self.assertEqual(manifest["config"]["processes"], ["imputed", "lr_y"])
            self.assertGreater(manifest["tv_bound"], 0.0)
            self.assertEqual(sorted(p.name for p in Path(tmp).glob("power_*.csv")),
                             ["power_imputed.csv", "power_lr_y.csv"])

    def test_unknown_source(self):
        with self.assertRaises(CommandError) as cm:
            run("simulate", "no_such_scenario", *FAST)
        self.assertEqual(cm.exception.returncode, EXIT_USAGE)

    def test_bad_override(self):
        with self.assertRaises(CommandError) as cm:
            run("simulate", "label_shift_low_corr_N30", *FAST, "--set", "alpha=0")
        self.assertEqual(cm.exception.returncode, EXIT_USAGE)

    def test_zero_workers(self):
        with self.assertRaises(CommandError) as cm:
            run("simulate", "label_shift_low_corr_N30", "--trials", "1", "--workers", "0")
        self.assertEqual(cm.exception.returncode, EXIT_USAGE)


class ValidateCommandTests(SimpleTestCase):

    def test_passes_at_unit_level(self):
        out = run("validate", "label_shift_low_corr_N30", *FAST, "--set", "alpha=1")
        self.assertIn("all processes within their envelopes", out)
        self.assertNotIn("FAIL", out)

    def test_reports_bound_and_writes_output(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = run("validate", "concept_shift_high_corr", *FAST, "--set", "null_mode=estimated",
                      "--set", "processes=imputed", "--output", tmp)
            self.assertTrue((Path(tmp) / "power_imputed.csv").is_file())
        self.assertIn("estimated-null TV bound", out)

    def test_envelope_failure(self):
        out = StringIO()
        rows = [("imputed", 0.5, 0.1, False), ("lr_y", 0.0, 0.1, True)]
        with mock.patch("cli.management.commands.validate.rejection_summary", return_value=rows):
            with self.assertRaises(CommandError) as cm:
                call_command("validate", "label_shift_low_corr_N30", *FAST, "--set", "processes=imputed,lr_y",
                             stdout=out)
        self.assertEqual(cm.exception.returncode, EXIT_ACCEPTANCE)
        self.assertIn("imputed", str(cm.exception))
        self.assertIn("FAIL", out.getvalue())
        self.assertNotIn("within their envelopes", out.getvalue())


class SettingsTests(SimpleTestCase):

    def test_no_model_or_timezone_settings(self):
        self.assertFalse(settings.is_overridden("USE_TZ"))
        self.assertFalse(settings.is_overridden("DEFAULT_AUTO_FIELD"))
