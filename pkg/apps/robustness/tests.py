import math

import numpy as np
from django.test import SimpleTestCase

from core.distributions import JointBernoulli, joint_from_concept_shift, joint_from_label_shift
from core.exceptions import DomainError, SizeError
from core.rng import RngHandle
from core.sampling import draw_covariates, draw_pairs
from core.shift_regime import ShiftRegime
from robustness.bounds import TvBoundInputs, sequence_tv_bound, step_tv_bound, step_tv_exact, tv_categorical
from robustness.estimation import NullEstimator, estimate_null_from_data


class TvDistanceTests(SimpleTestCase):

    def test_equal_tables(self):
        self.assertEqual(tv_categorical([0.2, 0.8], [0.2, 0.8]), 0.0)

    def test_two_point_laws(self):
        self.assertAlmostEqual(tv_categorical([0.5, 0.5], [0.4, 0.6]), 0.1, places=12)

    def test_disjoint_masses(self):
        self.assertEqual(tv_categorical([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]), 1.0)

    def test_support_mismatch(self):
        with self.assertRaises(DomainError):
            tv_categorical([0.5, 0.5], [0.2, 0.3, 0.5])

    def test_metric_properties(self):
        generator = np.random.default_rng(3)
        for _ in range(500):
            p, q, r = generator.dirichlet(np.ones(4), size=3)
            self.assertAlmostEqual(tv_categorical(p, q), tv_categorical(q, p), places=14)
            self.assertLessEqual(tv_categorical(p, r), tv_categorical(p, q) + tv_categorical(q, r) + 1e-12)
            self.assertGreater(tv_categorical(p, q), 0.0)


class StepBoundTests(SimpleTestCase):

    def test_zero_distances(self):
        self.assertEqual(step_tv_bound(15, 30, 0.0, 0.0), 0.0)

    def test_arithmetic(self):
        self.assertAlmostEqual(step_tv_bound(15, 30, 0.01, 0.005), 0.30, places=12)

    def test_out_of_range(self):
        with self.assertRaises(DomainError):
            step_tv_bound(1, 1, 1.5, 0.0)

    def test_bounds_exact_product_law(self):
        generator = np.random.default_rng(4)
        for _ in range(100):
            p = JointBernoulli(*generator.dirichlet(np.ones(4)))
            q = JointBernoulli(*generator.dirichlet(np.ones(4)))
            tv_xy = tv_categorical(p.cells(), q.cells())
            tv_x = tv_categorical([p.theta_x, 1 - p.theta_x], [q.theta_x, 1 - q.theta_x])
            self.assertLessEqual(step_tv_exact(p, q, 1, 1), step_tv_bound(1, 1, tv_xy, tv_x) + 1e-12)

    def test_exact_distance_of_equal_laws(self):
        dist = joint_from_label_shift(0.5, 0.35, 0.65)
        self.assertAlmostEqual(step_tv_exact(dist, dist, 2, 3), 0.0, places=12)

    def test_exact_distance_limit(self):
        dist = joint_from_label_shift(0.5, 0.35, 0.65)
        with self.assertRaises(SizeError):
            step_tv_exact(dist, dist, 5, 8)


class SequenceBoundTests(SimpleTestCase):

    def test_closed_form(self):
        k_xy = 4 * math.log(2) + math.log(4)
        k_x = 2 * math.log(2) + math.log(4)
        expected = 2 * (math.sqrt(k_xy / 2) + math.sqrt(k_x / 2))
        value = sequence_tv_bound(TvBoundInputs(t=1, n=1, N=1, M1=1, M2=1, delta=0.5))
        self.assertAlmostEqual(value, expected, delta=1e-12)

    def test_monotonicity(self):
        base = dict(t=10, n=15, N=30, M1=200, M2=200, delta=0.05)
        value = sequence_tv_bound(TvBoundInputs(**base))
        for key in ("t", "n", "N"):
            self.assertGreater(sequence_tv_bound(TvBoundInputs(**{**base, key: base[key] * 2})), value)
        for key in ("M1", "M2"):
            self.assertLess(sequence_tv_bound(TvBoundInputs(**{**base, key: base[key] * 2})), value)

    def test_doubling_null_samples(self):
        base = dict(t=7, n=3, N=5, M1=50, M2=80, delta=0.1)
        doubled = {**base, "M1": 100, "M2": 160}
        self.assertAlmostEqual(sequence_tv_bound(TvBoundInputs(**base)) / sequence_tv_bound(TvBoundInputs(**doubled)),
                               math.sqrt(2), places=12)

    def test_invalid_inputs(self):
        with self.assertRaises(DomainError):
            TvBoundInputs(t=1, n=1, N=1, M1=1, M2=1, delta=1.0)
        with self.assertRaises(DomainError):
            TvBoundInputs(t=0, n=1, N=1, M1=1, M2=1, delta=0.5)

    def test_holds_for_empirical_tables(self):
        # per-step TVs of tables estimated from M1, M2 samples, summed over t steps
        truth = joint_from_concept_shift(0.5, 0.4, 0.7)
        inputs = TvBoundInputs(t=5, n=2, N=3, M1=50, M2=50, delta=0.1)
        bound = sequence_tv_bound(inputs)
        generator = RngHandle(99).generator()
        covered = 0
        repeats = 200
        for _ in range(repeats):
            total = 0.0
            for _ in range(inputs.t):
                xs, ys = draw_pairs(truth, inputs.M1, generator)
                cells = [((xs == x) & (ys == y)).mean() for x, y in ((1, 1), (1, 0), (0, 1), (0, 0))]
                theta_x = draw_covariates(truth, inputs.M2, generator).mean()
                total += step_tv_bound(inputs.n, inputs.N, tv_categorical(cells, truth.cells()),
                                       abs(theta_x - truth.theta_x))
            covered += total <= bound
        self.assertGreaterEqual(covered / repeats, 1 - inputs.delta)


class NullEstimationTests(SimpleTestCase):

    def test_large_sample_recovers_table(self):
        truth = joint_from_label_shift(0.3, 0.2, 0.75)
        generator = RngHandle(5).generator()
        xs, ys = draw_pairs(truth, 100_000, generator)
        us = draw_covariates(truth, 100_000, generator)
        for regime in ShiftRegime:
            estimate = estimate_null_from_data(zip(xs, ys), us, regime)
            np.testing.assert_allclose(estimate.cells(), truth.cells(), atol=0.01)

    def test_single_observation_is_smoothed(self):
        for regime in ShiftRegime:
            estimate = estimate_null_from_data([(1, 1)], [], regime)
            self.assertTrue((estimate.cells() > 0).all())

    def test_order_invariance(self):
        pairs = [(1, 1), (0, 1), (0, 0), (1, 0), (1, 1)]
        a = estimate_null_from_data(pairs, [1, 0, 0], "concept_shift")
        b = estimate_null_from_data(pairs[::-1], [0, 1, 0], "concept_shift")
        self.assertEqual(a, b)

    def test_empty_sample(self):
        with self.assertRaises(DomainError):
            estimate_null_from_data([], [1, 0], "label_shift")

    def test_running_estimator_pools_samples(self):
        truth = joint_from_concept_shift(0.5, 0.4, 0.7)
        estimator = NullEstimator(truth, "concept_shift", M1=100, M2=300)
        root = RngHandle(8)
        for step in range(1, 11):
            estimate = estimator.refresh(root.derive(step))
        self.assertEqual(sum(estimator.counts.values()), 1000)
        self.assertEqual(estimator.unlabeled_total, 3000)
        self.assertAlmostEqual(estimate.theta_x, 0.5, delta=0.03)
        cond = estimator.conditional_estimates()
        self.assertEqual(cond.count_y0 + cond.count_y1, 1000)
