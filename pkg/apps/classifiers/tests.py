import numpy as np
from django.test import SimpleTestCase

from classifiers.classifier_kind import ClassifierKind
from classifiers.predictors import (
    ClassifierModel, ConditionalEstimates, bayes_posteriors, fit, fit_bayes, fit_threshold, posteriors_from_prior,
    predict, predict_batch, predict_many, untrained,
)
from core.distributions import joint_from_label_shift
from core.exceptions import ConfigError, DomainError
from core.rng import RngHandle
from core.sampling import LabeledBatch


def batch_with_label_mean(mean, n=20):
    ones = int(round(mean * n))
    return LabeledBatch(np.zeros(n, dtype=np.int8), np.r_[np.ones(ones), np.zeros(n - ones)])


class ConditionalEstimatesTests(SimpleTestCase):

    def test_laplace_smoothing(self):
        cond = ConditionalEstimates.from_counts(count_y0=8, count_y1=2, count_x1_y0=3, count_x1_y1=2)
        self.assertAlmostEqual(cond.p_x1_given_y0_hat, 0.4)
        self.assertAlmostEqual(cond.p_x1_given_y1_hat, 0.75)

    def test_empty_is_uninformative(self):
        cond = ConditionalEstimates.empty()
        self.assertEqual((cond.p_x1_given_y0_hat, cond.p_x1_given_y1_hat), (0.5, 0.5))

    def test_pooling_accumulates_counts(self):
        xs = np.array([[1, 0, 1], [0, 0, 1]])
        ys = np.array([[1, 1, 0], [0, 1, 1]])
        cond = ConditionalEstimates.empty().pooled_with(xs, ys)
        self.assertEqual((cond.count_y0, cond.count_y1), (2, 4))
        self.assertEqual((cond.count_x1_y0, cond.count_x1_y1), (1, 2))
        again = cond.pooled_with(xs, ys)
        self.assertEqual(again.count_y1, 8)


class ThresholdRuleTests(SimpleTestCase):

    def setUp(self):
        self.cond = ConditionalEstimates.exact(joint_from_label_shift(0.5, 0.35, 0.65))

    def test_balanced_prior(self):
        model = fit_threshold(batch_with_label_mean(0.5), self.cond)
        self.assertAlmostEqual(model.posterior[1], 0.65)
        self.assertEqual(predict(model, 1), 1)
        self.assertEqual(predict(model, 0), 0)

    def test_degenerate_priors(self):
        self.assertEqual(fit_threshold(batch_with_label_mean(0.0), self.cond).posterior, (0.0, 0.0))
        model = fit_threshold(batch_with_label_mean(1.0), self.cond)
        self.assertEqual(model.posterior, (1.0, 1.0))
        self.assertEqual([predict(model, x) for x in (0, 1)], [1, 1])

    def test_zero_denominator_gives_zero(self):
        cond = ConditionalEstimates(p_x1_given_y0_hat=1.0, p_x1_given_y1_hat=1.0)
        np.testing.assert_array_equal(posteriors_from_prior([0.5], cond)[0], [0.0, 0.5])

    def test_monotone_in_label_mean(self):
        previous = np.zeros(2, dtype=int)
        for mean in np.linspace(0.0, 1.0, 21):
            model = fit_threshold(batch_with_label_mean(mean), self.cond)
            current = np.array([predict(model, x) for x in (0, 1)])
            self.assertTrue((current >= previous).all())
            previous = current

    def test_needs_conditionals(self):
        with self.assertRaises(DomainError):
            fit(ClassifierKind.THRESHOLD, batch_with_label_mean(0.5))

    def test_tau_range(self):
        with self.assertRaises(DomainError):
            fit_threshold(batch_with_label_mean(0.5), self.cond, tau=1.0)


class BayesRuleTests(SimpleTestCase):

    def test_exact_counts(self):
        model = fit_bayes(LabeledBatch.from_pairs([(0, 1), (0, 1), (1, 0)]))
        self.assertEqual(model.posterior, (1.0, 0.0))
        self.assertEqual(fit_bayes(LabeledBatch.from_pairs([(1, 1), (1, 0)])).posterior[1], 0.5)

    def test_unseen_covariate(self):
        self.assertEqual(fit_bayes(LabeledBatch.from_pairs([(0, 1), (0, 0)])).posterior[1], 0.0)

    def test_batched_fit_matches_single(self):
        xs = np.array([[0, 0, 1, 1], [1, 1, 1, 0]])
        ys = np.array([[1, 0, 1, 1], [0, 1, 1, 0]])
        np.testing.assert_allclose(bayes_posteriors(xs, ys), [[0.5, 1.0], [0.0, 2 / 3]])

    def test_zero_posterior_never_predicts_one(self):
        model = ClassifierModel(ClassifierKind.BAYES, (0.0, 0.3))
        predictions = predict_many(model, np.zeros(1000, dtype=np.int8), RngHandle(3).generator())
        self.assertEqual(predictions.sum(), 0)

    def test_prediction_frequency(self):
        model = ClassifierModel(ClassifierKind.BAYES, (0.5, 0.5))
        predictions = predict_many(model, np.ones(100_000, dtype=np.int8), RngHandle(4).generator())
        self.assertAlmostEqual(predictions.mean(), 0.5, delta=0.01)

    def test_needs_random_stream(self):
        model = ClassifierModel(ClassifierKind.BAYES, (0.5, 0.5))
        with self.assertRaises(DomainError):
            predict(model, 1)
        self.assertIn(predict(model, 1, RngHandle(0)), (0, 1))

    def test_handle_repeats_its_draw(self):
        model = ClassifierModel(ClassifierKind.BAYES, (0.5, 0.5))
        handle = RngHandle(5)
        self.assertEqual(len({predict(model, 1, handle) for _ in range(50)}), 1)

    def test_generator_keeps_drawing(self):
        model = ClassifierModel(ClassifierKind.BAYES, (0.5, 0.5))
        generator = RngHandle(5).generator()
        draws = [predict(model, 1, generator) for _ in range(200)]
        self.assertEqual(set(draws), {0, 1})


class PredictBatchTests(SimpleTestCase):

    def test_rows_use_their_own_model(self):
        posteriors = np.array([[0.9, 0.1], [0.1, 0.9]])
        covariates = np.array([[0, 1, 0], [0, 1, 1]])
        predictions = predict_batch(ClassifierKind.THRESHOLD, posteriors, covariates)
        np.testing.assert_array_equal(predictions, [[1, 0, 1], [0, 1, 1]])

    def test_predictions_depend_on_covariate_only(self):
        model = ClassifierModel(ClassifierKind.THRESHOLD, (0.2, 0.8), tau=0.5)
        predictions = predict_many(model, np.array([1, 0, 1, 0]))
        np.testing.assert_array_equal(predictions, [1, 0, 1, 0])

    def test_untrained_models(self):
        self.assertEqual(untrained("bayes").posterior, (0.0, 0.0))
        self.assertEqual(untrained("threshold").tau, 0.5)

    def test_unknown_kind(self):
        with self.assertRaises(ConfigError):
            ClassifierKind.parse("forest")
