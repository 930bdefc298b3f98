import math

import numpy as np
from django.test import SimpleTestCase

from classifiers.classifier_kind import ClassifierKind
from core.distributions import joint_from_concept_shift, joint_from_label_shift
from core.exceptions import DomainError, SizeError
from core.rng import RngHandle
from core.sampling import sample_labeled, sample_unlabeled
from core.shift_regime import ShiftRegime
from imputed.enumeration import dataset_outcomes, expected_K_bruteforce, population_e_value
from imputed.evalue import EValue
from imputed.process import ImputedProcess
from imputed.statistic import ImputedConfig, grad_log_e_gamma, imputed_e_step, score_K, soft_ranks
from imputed.tuning import GammaTunerState, ScoreParams, adagrad_update

LABEL_NULL = joint_from_label_shift(0.5, 0.35, 0.65)
CONCEPT_NULL = joint_from_concept_shift(0.5, 0.4, 0.7)


def e_from_predictions(predictions, gamma):
    scores = [score_K(row, gamma) for row in predictions]
    return soft_ranks(scores)[0]


class ScoreTests(SimpleTestCase):

    def test_score_value(self):
        self.assertAlmostEqual(score_K([1, 0, 1], math.log(2)), 5.0, places=12)

    def test_small_gamma_counts_points(self):
        self.assertAlmostEqual(score_K([1, 1, 0, 1], 1e-12), 4.0, places=9)

    def test_strictly_increasing(self):
        base = np.zeros(5, dtype=int)
        for i in range(5):
            flipped = base.copy()
            flipped[i] = 1
            self.assertGreater(score_K(flipped, 0.3), score_K(base, 0.3))

    def test_empty_predictions(self):
        with self.assertRaises(DomainError):
            score_K([], 1.0)


class SoftRankTests(SimpleTestCase):

    def test_worked_example(self):
        predictions = [[1, 1], [0, 0], [0, 1]]
        self.assertAlmostEqual(e_from_predictions(predictions, 1.0), 2 * math.e / (math.e + 1), places=12)

    def test_single_dataset_is_one(self):
        self.assertEqual(e_from_predictions([[1, 0, 1]], 2.0), 1.0)

    def test_identical_predictions(self):
        self.assertAlmostEqual(e_from_predictions([[1, 0]] * 4, 1.5), 1.0, places=14)

    def test_ranks_sum_to_dataset_count(self):
        generator = np.random.default_rng(0)
        for _ in range(1000):
            M = int(generator.integers(1, 20))
            N = int(generator.integers(1, 30))
            gamma = float(generator.uniform(0.01, 10.0))
            predictions = generator.integers(0, 2, size=(M + 1, N))
            ranks = soft_ranks([score_K(row, gamma) for row in predictions])
            self.assertAlmostEqual(ranks.sum(), M + 1, delta=1e-12 * (M + 1))
            self.assertLess(ranks[0], M + 1)

    def test_flipping_observed_prediction_raises_e(self):
        predictions = np.array([[0, 0, 1], [1, 0, 1], [0, 1, 1]])
        flipped = predictions.copy()
        flipped[0, 0] = 1
        self.assertGreater(e_from_predictions(flipped, 0.7), e_from_predictions(predictions, 0.7))


class GradientTests(SimpleTestCase):

    def test_symmetric_instance(self):
        self.assertAlmostEqual(grad_log_e_gamma([[1, 0, 1]] * 3, 1.0), 0.0, places=12)

    def test_dominant_observed_vector(self):
        predictions = np.array([[1, 1, 1], [0, 0, 0], [0, 0, 0]])
        self.assertGreater(grad_log_e_gamma(predictions, 1.0), 0.0)

    def test_matches_finite_differences(self):
        generator = np.random.default_rng(1)
        h = 1e-6
        for _ in range(1000):
            M = int(generator.integers(1, 10))
            N = int(generator.integers(1, 20))
            gamma = float(generator.uniform(0.1, 5.0))
            predictions = generator.integers(0, 2, size=(M + 1, N))
            analytic = grad_log_e_gamma(predictions, gamma)
            numeric = (math.log(e_from_predictions(predictions, gamma + h))
                       - math.log(e_from_predictions(predictions, gamma - h))) / (2 * h)
            self.assertLessEqual(abs(analytic - numeric), 1e-6 * max(1.0, abs(analytic)))


class TunerTests(SimpleTestCase):

    def test_first_step(self):
        self.assertAlmostEqual(adagrad_update(GammaTunerState(), 2.0).gamma, 1.1, places=9)

    def test_zero_gradient(self):
        self.assertEqual(adagrad_update(GammaTunerState(), 0.0).gamma, 1.0)

    def test_stays_in_bounds(self):
        state = GammaTunerState()
        previous = state.gamma
        for _ in range(5000):
            state = adagrad_update(state, 50.0)
            self.assertGreaterEqual(state.gamma, previous)
            previous = state.gamma
        self.assertLessEqual(state.gamma, state.gamma_max)
        for _ in range(5000):
            state = adagrad_update(state, -50.0)
        self.assertGreaterEqual(state.gamma, state.gamma_min)

    def test_invalid_parameters(self):
        with self.assertRaises(DomainError):
            ScoreParams(gamma=20.0)
        with self.assertRaises(DomainError):
            GammaTunerState(lr=0.0)


class EValueTests(SimpleTestCase):

    def test_rejects_negative_and_nan(self):
        with self.assertRaises(DomainError):
            EValue(-0.5)
        with self.assertRaises(DomainError):
            EValue(float("nan"))
        self.assertEqual(float(EValue(2.5)), 2.5)


class ImputedStepTests(SimpleTestCase):

    def setUp(self):
        self.cfg = ImputedConfig(M=16, regime=ShiftRegime.LABEL_SHIFT, null_dist=LABEL_NULL,
                                 classifier=ClassifierKind.THRESHOLD, n=15, N=30)

    def observed(self, seed):
        rng = RngHandle(seed)
        return sample_labeled(LABEL_NULL, 15, rng.derive(0)), sample_unlabeled(LABEL_NULL, 30, rng.derive(1))

    def test_range_and_soft_rank_identity(self):
        e, diagnostics = imputed_e_step(self.observed(3), self.cfg, ScoreParams(), rng=RngHandle(3).derive(2))
        self.assertGreater(e.value, 0.0)
        self.assertLess(e.value, self.cfg.M + 1)
        self.assertAlmostEqual(diagnostics.soft_ranks().sum(), self.cfg.M + 1, places=10)
        self.assertEqual(diagnostics.null_xs.shape, (16, 15))

    def test_deterministic_given_stream(self):
        observed = self.observed(4)
        a, _ = imputed_e_step(observed, self.cfg, ScoreParams(), rng=RngHandle(9))
        b, _ = imputed_e_step(observed, self.cfg, ScoreParams(), rng=RngHandle(9))
        self.assertEqual(a, b)

    def test_no_null_datasets(self):
        cfg = ImputedConfig(M=0, regime="label_shift", null_dist=LABEL_NULL, classifier="threshold", n=15, N=30)
        e, _ = imputed_e_step(self.observed(5), cfg, ScoreParams(), rng=RngHandle(5))
        self.assertEqual(e.value, 1.0)

    def test_batch_size_mismatch(self):
        labeled, _ = self.observed(6)
        with self.assertRaises(DomainError):
            imputed_e_step((labeled, sample_unlabeled(LABEL_NULL, 5, RngHandle(0))), self.cfg, ScoreParams(),
                           rng=RngHandle(0))

    def test_null_mean_is_one(self):
        cfg = ImputedConfig(M=8, regime="concept_shift", null_dist=CONCEPT_NULL, classifier="bayes", n=15, N=30)
        values = []
        for i in range(2000):
            rng = RngHandle(77, i)
            observed = (sample_labeled(CONCEPT_NULL, 15, rng.derive(0)), sample_unlabeled(CONCEPT_NULL, 30, rng.derive(1)))
            e, _ = imputed_e_step(observed, cfg, ScoreParams(gamma=2.0), rng=rng.derive(2))
            values.append(e.value)
        values = np.array(values)
        se = values.std(ddof=1) / math.sqrt(values.size)
        self.assertLess(abs(values.mean() - 1.0), 4 * se)


class ImputedProcessTests(SimpleTestCase):

    def test_gamma_is_fixed_before_each_step(self):
        cfg = ImputedConfig(M=8, regime="label_shift", null_dist=LABEL_NULL, classifier="threshold", n=15, N=30)
        process = ImputedProcess(cfg)
        gammas_before = []
        for step in range(1, 6):
            rng = RngHandle(12).derive(step)
            gammas_before.append(process.tuner.gamma)
            process.step(sample_labeled(LABEL_NULL, 15, rng.derive(0)), sample_unlabeled(LABEL_NULL, 30, rng.derive(1)),
                         rng.derive(2))
        self.assertEqual(process.gamma_trace, gammas_before)

    def test_pools_null_labels(self):
        cfg = ImputedConfig(M=4, regime="label_shift", null_dist=LABEL_NULL, classifier="threshold", n=15, N=30)
        process = ImputedProcess(cfg)
        rng = RngHandle(1)
        process.step(sample_labeled(LABEL_NULL, 15, rng.derive(0)), sample_unlabeled(LABEL_NULL, 30, rng.derive(1)),
                     rng.derive(2))
        self.assertEqual(process.cond.count_y0 + process.cond.count_y1, 4 * 15)


class EnumerationTests(SimpleTestCase):

    def test_probabilities_sum_to_one(self):
        for regime, null in ((ShiftRegime.LABEL_SHIFT, LABEL_NULL), (ShiftRegime.CONCEPT_SHIFT, CONCEPT_NULL)):
            for kind in ClassifierKind:
                cfg = ImputedConfig(M=1, regime=regime, null_dist=null, classifier=kind, n=2, N=2)
                total = sum(p for p, _ in dataset_outcomes(cfg))
                self.assertAlmostEqual(total, 1.0, places=12)

    def test_constant_predictor(self):
        # theta_Y = 1: every posterior is 1, every prediction is 1
        null = joint_from_label_shift(1.0, 0.3, 0.6)
        cfg = ImputedConfig(M=1, regime="label_shift", null_dist=null, classifier="threshold", n=1, N=2)
        self.assertAlmostEqual(expected_K_bruteforce(cfg, 1.0), 2 * math.e, places=12)

    def test_population_statistic_has_mean_one(self):
        cfg = ImputedConfig(M=1, regime="concept_shift", null_dist=CONCEPT_NULL, classifier="bayes", n=1, N=2)
        total = 0.0
        for p, ones in dataset_outcomes(cfg):
            total += p * population_e_value(np.r_[np.ones(ones), np.zeros(2 - ones)], cfg, 1.3)
        self.assertAlmostEqual(total, 1.0, delta=1e-10)

    def test_oversize_instance(self):
        cfg = ImputedConfig(M=1, regime="label_shift", null_dist=LABEL_NULL, classifier="bayes", n=4, N=6)
        with self.assertRaises(SizeError):
            dataset_outcomes(cfg)
