import math
from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from baselines.constants import LAMBDA_MAX, ONS_SCALE
from baselines.likelihood_ratio import (
    ConditionalKT, KTEstimator, lr_conditional_step, lr_payoffs, lr_step,
)
from baselines.ppi import (
    PpiHistory, PpiState, ons_update, ppi_epsilon, ppi_expected_payoff_bruteforce, ppi_payoff, ppi_step,
    refit_predictor, unlabeled_slices,
)
from classifiers.classifier_kind import ClassifierKind
from classifiers.predictors import ClassifierModel, ConditionalEstimates
from core.distributions import joint_from_concept_shift, joint_from_label_shift
from core.exceptions import DomainError, SizeError
from core.rng import RngHandle
from core.sampling import LabeledBatch, UnlabeledBatch, sample_labeled, sample_unlabeled


class LikelihoodRatioTests(SimpleTestCase):

    def test_kt_prior_matches_fair_null(self):
        e, est = lr_step([1], 0.5, KTEstimator())
        self.assertAlmostEqual(e.value, 1.0)
        self.assertEqual((est.ones, est.total), (1, 1))

    def test_payoff_after_history(self):
        e, _ = lr_step([1], 0.5, KTEstimator(ones=3, total=4))
        self.assertAlmostEqual(e.value, 1.4)

    def test_batch_is_product_of_single_points(self):
        bits = [1, 0, 0, 1, 1, 1, 0]
        batch, _ = lr_step(bits, 0.3, KTEstimator())
        est, product = KTEstimator(), 1.0
        for b in bits:
            e, est = lr_step([b], 0.3, est)
            product *= e.value
        self.assertAlmostEqual(batch.value, product, places=12)

    def test_degenerate_null(self):
        for theta in (0.0, 1.0):
            with self.assertRaises(DomainError):
                lr_payoffs([1], theta, KTEstimator())

    def test_predictive_mean_inside_unit_interval(self):
        for ones, total in ((0, 0), (0, 1000), (1000, 1000)):
            mean = KTEstimator(ones, total).predictive_mean
            self.assertTrue(0.0 < mean < 1.0)

    def test_conditional_routing(self):
        labeled = LabeledBatch.from_pairs([(0, 1), (1, 0), (0, 1)])
        e, est = lr_conditional_step(labeled, (0.5, 0.5), ConditionalKT())
        # x=0 stream: 1 then 1 -> (0.5/0.5)(0.75/0.5); x=1 stream: 0 -> 1
        self.assertAlmostEqual(e.value, 1.5)
        self.assertEqual(est.given_x0.total, 2)
        self.assertEqual(est.given_x1.ones, 0)

    def test_null_mean_of_running_product(self):
        generator = RngHandle(31).generator()
        finals = []
        for _ in range(4000):
            bits = (generator.random(20) < 0.4).astype(int)
            finals.append(np.prod(lr_payoffs(bits, 0.4, KTEstimator())))
        finals = np.array(finals)
        se = finals.std(ddof=1) / math.sqrt(finals.size)
        self.assertLess(abs(finals.mean() - 1.0), 4 * se)


class PpiEpsilonTests(SimpleTestCase):

    def test_constant_predictions(self):
        self.assertEqual(ppi_epsilon([(1, 1.0), (0, 1.0), (1, 1.0)], 5), 0.0)

    def test_short_history(self):
        self.assertEqual(ppi_epsilon([(1, 1.0)], 5), 0.0)

    def test_perfect_correlation(self):
        pairs = [(1, 1.0), (0, 0.0), (1, 1.0), (0, 0.0)]
        self.assertAlmostEqual(ppi_epsilon(pairs, 3), 0.75)

    def test_anti_correlation_is_clamped(self):
        pairs = [(1, 0.0), (0, 1.0), (1, 0.0), (0, 1.0)]
        eps = ppi_epsilon(pairs, 100)
        self.assertLess(eps, 0.0)
        self.assertGreaterEqual(eps, -1.0)

    def test_running_sums_match_pairs(self):
        pairs = [(1, 1.0), (0, 1.0), (1, 0.0), (1, 1.0), (0, 0.0)]
        self.assertEqual(ppi_epsilon(PpiHistory.from_pairs(pairs), 4), ppi_epsilon(pairs, 4))

    def test_variance_reduction(self):
        # phi close to 0.7 between Y and an informative randomized predictor
        dist = joint_from_label_shift(0.5, 0.2, 0.9)
        model = ClassifierModel(ClassifierKind.BAYES, (dist.p_y1_given_x(0), dist.p_y1_given_x(1)))
        generator = RngHandle(8).generator()
        slice_size = 2
        labeled = sample_labeled(dist, 20_000, RngHandle(9))
        covariates = sample_unlabeled(dist, 20_000 * slice_size, RngHandle(10)).xs.reshape(-1, slice_size)
        f_x = (generator.random(len(labeled)) < np.asarray(model.posterior)[labeled.xs]).astype(float)
        f_slice = (generator.random(covariates.shape) < np.asarray(model.posterior)[covariates]).astype(float)
        history = PpiHistory.from_pairs(zip(labeled.ys[:2000], f_x[:2000]))
        eps = ppi_epsilon(history, slice_size)
        correction = f_slice.mean(axis=1) - f_x
        self.assertGreater(eps, 0.0)
        self.assertLessEqual(np.var(labeled.ys + eps * correction), np.var(labeled.ys + 0.0 * correction))


class PpiPayoffTests(SimpleTestCase):

    def setUp(self):
        self.model = ClassifierModel(ClassifierKind.THRESHOLD, (0.3, 0.8), tau=0.5)

    def test_no_bet(self):
        state = PpiState(lam=0.0, epsilon=0.7, model=self.model)
        self.assertEqual(ppi_payoff(1, 1, [0, 1], state, 0.5).value, 1.0)

    def test_plain_labeled_bet(self):
        state = PpiState(lam=0.5, epsilon=0.0, model=self.model)
        self.assertAlmostEqual(ppi_payoff(1, 0, [1], state, 0.5).value, 1.25)

    def test_correction_vanishes_when_slice_agrees(self):
        with_eps = PpiState(lam=0.5, epsilon=1.0, model=self.model)
        without = PpiState(lam=0.5, epsilon=0.0, model=self.model)
        self.assertEqual(ppi_payoff(0, 1, [1, 1], with_eps, 0.4), ppi_payoff(0, 1, [1, 1], without, 0.4))

    def test_empty_slice(self):
        with self.assertRaises(DomainError):
            ppi_payoff(1, 1, [], PpiState(model=self.model), 0.5)


class OnsTests(SimpleTestCase):

    def test_no_gradient_at_null(self):
        state = ons_update(PpiState(lam=0.2), 0.5, 0.5)
        self.assertEqual(state.lam, 0.2)

    def test_first_step_is_clamped(self):
        state = ons_update(PpiState(), 1.0, 0.5)
        self.assertAlmostEqual(state.a, 1.25)
        self.assertEqual(state.lam, min(LAMBDA_MAX, ONS_SCALE * 0.5 / 1.25))

    def test_one_sided_never_bets_negative(self):
        state = PpiState(one_sided=True)
        for _ in range(50):
            state = ons_update(state, 0.0, 0.5)
            self.assertEqual(state.lam, 0.0)

    def test_lambda_and_epsilon_stay_in_range(self):
        generator = RngHandle(13).generator()
        state = PpiState()
        for _ in range(2000):
            w = generator.uniform(-1.0, 2.0)
            state = ons_update(state, w, 0.5)
            self.assertTrue(-0.5 <= state.lam <= 0.5)

    def test_literal_gradient(self):
        state = ons_update(PpiState(gradient="literal"), 1.0, 0.5)
        self.assertAlmostEqual(state.a, 2.0)

    def test_unknown_gradient(self):
        with self.assertRaises(DomainError):
            PpiState(gradient="newton")


class PpiStepTests(SimpleTestCase):

    def setUp(self):
        self.null = joint_from_concept_shift(0.5, 0.4, 0.7)
        self.cond = ConditionalEstimates.exact(self.null)

    def test_slices(self):
        self.assertEqual(unlabeled_slices(3, 10), [(0, 3), (3, 6), (6, 10)])
        self.assertEqual(unlabeled_slices(3, 2), [(0, 1), (1, 2), (0, 2)])

    def test_one_sided_on_null_favouring_data(self):
        labeled = LabeledBatch.from_pairs([(0, 0)] * 5)
        unlabeled = UnlabeledBatch(np.zeros(10, dtype=np.int8))
        state = PpiState(one_sided=True)
        for _ in range(3):
            e, state = ppi_step(labeled, unlabeled, state, 0.55, cond=self.cond)
            self.assertEqual(e.value, 1.0)

    def test_state_accumulates_history(self):
        rng = RngHandle(21)
        state = PpiState(classifier=ClassifierKind.BAYES)
        for step in range(1, 4):
            labeled = sample_labeled(self.null, 15, rng.derive(step, 0))
            unlabeled = sample_unlabeled(self.null, 135, rng.derive(step, 1))
            e, state = ppi_step(labeled, unlabeled, state, self.null.theta_y,
                                generator=rng.derive(step, 2).generator())
            self.assertGreater(e.value, 0.0)
        self.assertEqual(state.history.count, 45)
        self.assertEqual(sum(state.labeled_counts[::2]), 45)
        self.assertTrue(-1.0 <= state.epsilon <= 1.0)

    def test_threshold_refit_needs_conditionals(self):
        state = PpiState(labeled_counts=(3, 1, 2, 2))
        with self.assertRaises(DomainError):
            refit_predictor(state)
        model = refit_predictor(state, self.cond)
        self.assertEqual(model.kind, ClassifierKind.THRESHOLD)

    def test_exact_null_mean(self):
        null = joint_from_label_shift(0.5, 0.35, 0.65)
        model = ClassifierModel(ClassifierKind.BAYES, (null.p_y1_given_x(0), null.p_y1_given_x(1)))
        for lam, eps, slice_size in ((0.3, 0.5, 1), (-0.5, 1.0, 1), (0.5, -0.4, 3)):
            state = PpiState(lam=lam, epsilon=eps, model=model, classifier=ClassifierKind.BAYES)
            value = ppi_expected_payoff_bruteforce(null, state, slice_size=slice_size)
            self.assertAlmostEqual(value, 1.0, delta=1e-10)

    def test_exact_null_mean_threshold_predictor(self):
        model = ClassifierModel(ClassifierKind.THRESHOLD, (0.4, 0.7), tau=0.5)
        state = replace(PpiState(lam=0.4, epsilon=0.9, model=model), one_sided=True)
        self.assertAlmostEqual(ppi_expected_payoff_bruteforce(self.null, state, slice_size=2), 1.0, delta=1e-10)

    def test_enumeration_limit(self):
        with self.assertRaises(SizeError):
            ppi_expected_payoff_bruteforce(self.null, PpiState(), slice_size=20)

    def test_labeled_only_ignores_unlabeled_data(self):
        rng = RngHandle(31)
        states = [PpiState(labeled_only=True), PpiState(labeled_only=True)]
        for step in range(1, 5):
            labeled = sample_labeled(self.null, 10, rng.derive(step, 0))
            values = []
            for k, state in enumerate(states):
                unlabeled = sample_unlabeled(self.null, 30, rng.derive(step, 1 + k))
                e, states[k] = ppi_step(labeled, unlabeled, state, self.null.theta_y, cond=self.cond)
                values.append(e.value)
            self.assertEqual(values[0], values[1])
        self.assertEqual(states[0].epsilon, 0.0)
        self.assertEqual(states[0].history.count, 40)
