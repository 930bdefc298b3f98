import numpy as np
from django.test import SimpleTestCase

from core.distributions import (
    JointBernoulli, joint_from_concept_shift, joint_from_label_shift, joint_from_regime, phi_correlation,
)
from core.exceptions import ConfigError, DomainError, InferenceError, UndefinedCorrelationError
from core.rng import RngHandle
from core.sampling import LabeledBatch, UnlabeledBatch, sample_labeled, sample_unlabeled
from core.shift_regime import ShiftRegime


class JointBernoulliTests(SimpleTestCase):

    def test_rejects_tables_that_do_not_sum_to_one(self):
        with self.assertRaises(DomainError):
            JointBernoulli(0.3, 0.3, 0.3, 0.3)

    def test_rejects_negative_cells(self):
        with self.assertRaises(DomainError):
            JointBernoulli(-0.1, 0.5, 0.3, 0.3)

    def test_label_shift_low_correlation(self):
        dist = joint_from_label_shift(0.5, 0.35, 0.65)
        self.assertAlmostEqual(dist.theta_x, 0.5, places=12)
        self.assertAlmostEqual(dist.p11, 0.325, places=12)
        self.assertAlmostEqual(dist.p00, 0.325, places=12)

    def test_label_shift_alternative_moves_theta_x(self):
        self.assertAlmostEqual(joint_from_label_shift(0.52, 0.35, 0.65).theta_x, 0.506, places=12)

    def test_label_shift_degenerate_y(self):
        dist = joint_from_label_shift(0.0, 0.3, 0.8)
        self.assertEqual(dist.p11, 0.0)
        self.assertEqual(dist.p01, 0.0)

    def test_concept_shift_marginal_of_y(self):
        self.assertAlmostEqual(joint_from_concept_shift(0.5, 0.4, 0.7).theta_y, 0.55, places=12)
        self.assertAlmostEqual(joint_from_concept_shift(0.5, 0.42, 0.72).theta_y, 0.57, places=12)
        self.assertAlmostEqual(joint_from_concept_shift(1.0, 0.1, 0.9).theta_y, 0.9, places=12)

    def test_parameters_outside_unit_interval(self):
        with self.assertRaises(DomainError):
            joint_from_label_shift(1.2, 0.3, 0.4)
        with self.assertRaises(DomainError):
            joint_from_concept_shift(0.5, -0.1, 0.4)

    def test_decomposition_round_trips(self):
        generator = np.random.default_rng(7)
        for _ in range(200):
            params = generator.random(3)
            for regime in ShiftRegime:
                dist = joint_from_regime(regime, params)
                self.assertAlmostEqual(dist.cells().sum(), 1.0, delta=1e-12)
                np.testing.assert_allclose(dist.decompose(regime), params, atol=1e-12)

    def test_regime_parameters_by_name(self):
        dist = joint_from_regime("concept_shift", {"theta_x": 0.5, "theta_y_given_x0": 0.4, "theta_y_given_x1": 0.7})
        self.assertEqual(dist.to_dict("concept_shift")["theta_y_given_x1"], dist.p_y1_given_x(1))

    def test_shares_fixed_factor(self):
        null = joint_from_label_shift(0.5, 0.35, 0.65)
        self.assertTrue(joint_from_label_shift(0.52, 0.35, 0.65).shares_fixed_factor(null, "label_shift"))
        self.assertFalse(joint_from_label_shift(0.5, 0.3, 0.65).shares_fixed_factor(null, "label_shift"))
        concept = joint_from_concept_shift(0.5, 0.4, 0.7)
        self.assertTrue(joint_from_concept_shift(0.5, 0.42, 0.72).shares_fixed_factor(concept, "concept_shift"))


class PhiCorrelationTests(SimpleTestCase):

    def test_independent_table(self):
        self.assertAlmostEqual(phi_correlation(JointBernoulli(0.25, 0.25, 0.25, 0.25)), 0.0, places=12)

    def test_catalog_correlations(self):
        self.assertAlmostEqual(phi_correlation(joint_from_label_shift(0.5, 0.35, 0.65)), 0.3, places=12)
        # 0.7035: the high-correlation table is only labeled 0.7
        self.assertAlmostEqual(phi_correlation(joint_from_label_shift(0.5, 0.2, 0.9)), 0.7, delta=0.01)

    def test_degenerate_marginal(self):
        with self.assertRaises(UndefinedCorrelationError):
            phi_correlation(joint_from_concept_shift(1.0, 0.2, 0.6))


class ShiftRegimeTests(SimpleTestCase):

    def test_parse(self):
        self.assertIs(ShiftRegime.parse("Label-Shift"), ShiftRegime.LABEL_SHIFT)
        self.assertIs(ShiftRegime.parse(ShiftRegime.CONCEPT_SHIFT), ShiftRegime.CONCEPT_SHIFT)

    def test_unknown_regime(self):
        with self.assertRaises(ConfigError) as cm:
            ShiftRegime.parse("covariate_shift")
        self.assertIn("[CONFIG]", str(cm.exception))
        self.assertIsInstance(cm.exception, InferenceError)


class RngHandleTests(SimpleTestCase):

    def test_same_address_same_stream(self):
        a = RngHandle(42, 3).generator().random(5)
        b = RngHandle(42, 3).generator().random(5)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = RngHandle(42, 3).generator().random(5)
        b = RngHandle(42, 4).generator().random(5)
        self.assertFalse(np.array_equal(a, b))

    def test_derive_is_deterministic(self):
        root = RngHandle(11, 2)
        self.assertEqual(root.derive(5, 1), root.derive(5, 1))
        self.assertNotEqual(root.derive(5, 1), root.derive(5, 2))
        self.assertNotEqual(root.derive(5, 1), RngHandle(11, 3).derive(5, 1))


class SamplingTests(SimpleTestCase):

    def setUp(self):
        self.fair = joint_from_label_shift(0.5, 0.35, 0.65)

    def test_labeled_determinism(self):
        rng = RngHandle(1, 9)
        self.assertEqual(sample_labeled(self.fair, 5, rng), sample_labeled(self.fair, 5, rng))

    def test_point_mass(self):
        batch = sample_labeled(JointBernoulli(1.0, 0.0, 0.0, 0.0), 3, RngHandle(0))
        self.assertEqual(batch.pairs, [(1, 1)] * 3)
        covariates = sample_unlabeled(joint_from_concept_shift(1.0, 0.3, 0.3), 4, RngHandle(0))
        np.testing.assert_array_equal(covariates.xs, [1, 1, 1, 1])

    def test_empty_batches_rejected(self):
        with self.assertRaises(DomainError):
            sample_labeled(self.fair, 0, RngHandle(0))
        with self.assertRaises(DomainError):
            sample_unlabeled(self.fair, 0, RngHandle(0))

    def test_label_frequency(self):
        batch = sample_labeled(self.fair, 100_000, RngHandle(2024))
        self.assertAlmostEqual(batch.ys.mean(), 0.5, delta=0.005)

    def test_cell_frequencies(self):
        dist = joint_from_concept_shift(0.3, 0.2, 0.75)
        batch = sample_labeled(dist, 100_000, RngHandle(5))
        for x in (0, 1):
            for y in (0, 1):
                p = dist.probability(x, y)
                freq = ((batch.xs == x) & (batch.ys == y)).mean()
                self.assertLessEqual(abs(freq - p), 4 * np.sqrt(p * (1 - p) / 100_000))

    def test_covariate_frequency(self):
        dist = joint_from_label_shift(0.52, 0.35, 0.65)
        covariates = sample_unlabeled(dist, 100_000, RngHandle(6))
        self.assertAlmostEqual(covariates.xs.mean(), 0.506, delta=0.005)

    def test_batch_construction(self):
        batch = LabeledBatch.from_pairs([(0, 1), (1, 0)])
        self.assertEqual(len(batch), 2)
        np.testing.assert_array_equal(batch.ys, [1, 0])
        with self.assertRaises(DomainError):
            LabeledBatch.from_pairs([])
        with self.assertRaises(DomainError):
            UnlabeledBatch(np.array([], dtype=np.int8))
