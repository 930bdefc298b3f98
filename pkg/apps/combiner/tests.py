import math

import numpy as np
from django.test import SimpleTestCase

from combiner.portfolio import (
    ConvexCombination, EProcessState, SimplexWeights, check_rejection, combine, eg_update, wealth_update,
)
from core.exceptions import DomainError
from core.rng import RngHandle


class CombineTests(SimpleTestCase):

    def test_uniform_weights_on_unit_evalues(self):
        self.assertAlmostEqual(combine([1, 1, 1], SimplexWeights.uniform(3)).value, 1.0)

    def test_vertex_weight(self):
        self.assertEqual(combine([3.0, 0.2], SimplexWeights(np.array([1.0, 0.0]))).value, 3.0)

    def test_dot_product(self):
        self.assertAlmostEqual(combine([2.0, 0.5], SimplexWeights(np.array([0.3, 0.7]))).value, 0.95)

    def test_length_mismatch(self):
        with self.assertRaises(DomainError):
            combine([1.0, 2.0], SimplexWeights.uniform(3))

    def test_weights_must_be_on_simplex(self):
        with self.assertRaises(DomainError):
            SimplexWeights(np.array([0.6, 0.6]))


class ExponentiatedGradientTests(SimpleTestCase):

    def test_equal_evalues_keep_weights(self):
        weights = SimplexWeights(np.array([0.2, 0.5, 0.3]))
        np.testing.assert_allclose(eg_update(weights, [1.7, 1.7, 1.7]).w, weights.w, atol=1e-15)

    def test_tiny_learning_rate(self):
        weights = SimplexWeights(np.array([0.2, 0.8]))
        np.testing.assert_allclose(eg_update(weights, [5.0, 0.1], eta=1e-12).w, weights.w, atol=1e-10)

    def test_worked_update(self):
        updated = eg_update(SimplexWeights.uniform(2), [2.0, 1.0], eta=0.1)
        np.testing.assert_allclose(updated.w, [0.5166, 0.4834], atol=1e-4)

    def test_zero_combined_value(self):
        weights = SimplexWeights(np.array([0.4, 0.6]))
        self.assertIs(eg_update(weights, [0.0, 0.0]), weights)

    def test_stays_on_simplex(self):
        generator = RngHandle(17).generator()
        weights = SimplexWeights.uniform(5)
        for _ in range(10_000):
            weights = eg_update(weights, generator.exponential(1.0, size=5))
            self.assertAlmostEqual(weights.w.sum(), 1.0, delta=1e-12)
            self.assertTrue((weights.w >= 0).all())

    def test_concentrates_on_winning_expert(self):
        combo = ConvexCombination(("a", "b", "c"), alpha=0.05)
        for _ in range(3000):
            combo.step({"a": 1.0, "b": 1.5, "c": 1.0})
        self.assertGreater(combo.weights.w[1], 0.95)
        start = combo.state.log_wealth
        for _ in range(100):
            combo.step({"a": 1.0, "b": 1.5, "c": 1.0})
        self.assertAlmostEqual((combo.state.log_wealth - start) / 100, math.log(1.5), delta=0.02)


class WealthTests(SimpleTestCase):

    def test_unit_evalues_never_stop(self):
        state = EProcessState(alpha=0.05)
        for _ in range(100):
            state = wealth_update(state, 1.0)
        self.assertEqual(state.log_wealth, 0.0)
        self.assertFalse(check_rejection(state))

    def test_crossing_at_first_step(self):
        state = wealth_update(EProcessState(alpha=0.05), 21.0)
        self.assertEqual(state.stopped_at, 1)
        self.assertTrue(check_rejection(state))

    def test_stopping_is_permanent(self):
        state = wealth_update(EProcessState(alpha=0.05), 21.0)
        for _ in range(10):
            state = wealth_update(state, 0.01)
        self.assertEqual(state.stopped_at, 1)
        self.assertEqual(state.step, 11)

    def test_zero_evalue_is_floored(self):
        state = wealth_update(EProcessState(), 0.0)
        self.assertTrue(math.isfinite(state.log_wealth))

    def test_invalid_alpha(self):
        with self.assertRaises(DomainError):
            EProcessState(alpha=0.0)


class ConvexCombinationTests(SimpleTestCase):

    def test_weights_use_only_past_evalues(self):
        combo = ConvexCombination(("a", "b"), alpha=0.05)
        combined, used = combo.step({"a": 4.0, "b": 1.0})
        np.testing.assert_array_equal(used.w, [0.5, 0.5])
        self.assertAlmostEqual(combined.value, 2.5)
        _, used = combo.step({"a": 100.0, "b": 1.0})
        np.testing.assert_allclose(used.w, eg_update(SimplexWeights.uniform(2), [4.0, 1.0]).w)

    def test_missing_member(self):
        combo = ConvexCombination(("a", "b"), alpha=0.05)
        with self.assertRaises(KeyError):
            combo.step({"a": 1.0})
