"""Tests for the herding engine and traces."""

import unittest

import numpy as np

from herding_box.engine import (
    IDENTITY_TOLERANCE,
    apply_update,
    greedy_dual_choice,
    herd_run,
    herd_step,
    pct_violated,
    tipi_value,
)
from herding_box.exceptions import DimensionMismatchError, NonFiniteWeightError, PctViolationError
from herding_box.feature_map import TableFeatureMap
from herding_box.maximizer import CoordinateAscentMaximizer, ExactEnumerationMaximizer
from herding_box.models import RandomModelSpec, random_mrf, rbm_features
from herding_box.moments import MomentVector
from herding_box.scalar import GOLDEN
from herding_box.trace import TraceConfig


def _neuron_map() -> TableFeatureMap:
    return TableFeatureMap([[0.0], [1.0]])


class TestHerdStep(unittest.TestCase):
    def test_fibonacci_neuron_step(self):
        """Test s=1 and w'=w+pi-1 for the golden-mean neuron."""
        fmap = _neuron_map()
        moments = MomentVector.for_features(fmap, [0.618034])
        state, weights = herd_step(np.array([0.236068]), moments, fmap, ExactEnumerationMaximizer())
        self.assertEqual(state.index, 1)
        self.assertAlmostEqual(float(weights[0]), -0.145898, places=12)

    def test_zero_weights_pick_lowest_state(self):
        """Test w=0 gives state 0 and w'=phi_bar-phi(0)."""
        fmap = TableFeatureMap.one_of_d(3)
        moments = MomentVector.for_features(fmap, [0.2, 0.3, 0.5])
        state, weights = herd_step(np.zeros(3), moments, fmap, ExactEnumerationMaximizer())
        self.assertEqual(state.index, 0)
        np.testing.assert_array_equal(weights, np.array([0.2, 0.3, 0.5]) - np.array([1.0, 0.0, 0.0]))

    def test_three_state_hand_simulation(self):
        """Test the 1-of-3 example step."""
        fmap = TableFeatureMap.one_of_d(3)
        moments = MomentVector.for_features(fmap, [0.5, 0.25, 0.25])
        state, weights = herd_step(moments.values.copy(), moments, fmap, ExactEnumerationMaximizer())
        self.assertEqual(state.index, 0)
        np.testing.assert_array_equal(weights, [0.0, 0.5, 0.5])

    def test_pct_violation_detected_for_bad_maximizer(self):
        """Test a local maximizer stuck in a poor state is caught."""
        fmap = TableFeatureMap([[0.0], [1.0]])
        moments = MomentVector.for_features(fmap, [0.5])
        maximizer = CoordinateAscentMaximizer(max_sweeps=0)
        with self.assertRaises(PctViolationError) as context:
            herd_step(np.array([1.0]), moments, fmap, maximizer)
        self.assertGreater(context.exception.inner_product, 0.0)

    def test_dimension_mismatch(self):
        """Test weights must match the feature dimension."""
        fmap = TableFeatureMap.one_of_d(3)
        moments = MomentVector.for_features(fmap, [0.5, 0.25, 0.25])
        with self.assertRaises(DimensionMismatchError):
            herd_step(np.zeros(2), moments, fmap, ExactEnumerationMaximizer())

    def test_non_finite_weights(self):
        """Test non-finite weights raise."""
        fmap = TableFeatureMap.one_of_d(2)
        moments = MomentVector.for_features(fmap, [0.5, 0.5])
        with self.assertRaises(NonFiniteWeightError):
            herd_step(np.array([np.inf, 0.0]), moments, fmap, ExactEnumerationMaximizer())


class TestHerdRun(unittest.TestCase):
    def test_fibonacci_neuron_samples(self):
        """Test the first 8 samples are 1,0,1,1,0,1,0,1."""
        fmap = _neuron_map()
        moments = MomentVector.for_features(fmap, [GOLDEN])
        trace = herd_run(np.array([2.0 * GOLDEN - 1.0]), moments, fmap, ExactEnumerationMaximizer(), 8)
        np.testing.assert_array_equal(trace.state_indices, [1, 0, 1, 1, 0, 1, 0, 1])

    def test_vertex_moment_is_stationary(self):
        """Test phi_bar on a vertex repeats that state and keeps w at 0."""
        fmap = TableFeatureMap.one_of_d(3)
        moments = MomentVector.for_features(fmap, [1.0, 0.0, 0.0])
        trace = herd_run(np.zeros(3), moments, fmap, ExactEnumerationMaximizer(), 20, TraceConfig(snapshot_stride=1))
        self.assertTrue(np.all(trace.state_indices == 0))
        np.testing.assert_array_equal(trace.weights_at_stride_one(), np.zeros((21, 3)))

    def test_three_state_cycle(self):
        """Test the period-4 cycle 0,1,2,0 with exact frequencies."""
        fmap = TableFeatureMap.one_of_d(3)
        moments = MomentVector.for_features(fmap, [0.5, 0.25, 0.25])
        trace = herd_run(None, moments, fmap, ExactEnumerationMaximizer(), 40)
        np.testing.assert_array_equal(trace.state_indices, np.tile([0, 1, 2, 0], 10))
        np.testing.assert_array_equal(trace.running_feature_sum / 40, [0.5, 0.25, 0.25])
        np.testing.assert_array_equal(trace.final_weights, moments.values)

    def test_moment_identity(self):
        """Test w_T = w_0 + T phi_bar - sum phi(s_t) on a random model."""
        model = random_mrf(RandomModelSpec(10, 7, seed=3))
        trace = herd_run(None, model.moments, model.fmap, ExactEnumerationMaximizer(), 2000)
        self.assertLessEqual(trace.identity_residual(model.moments), IDENTITY_TOLERANCE * 2000)
        np.testing.assert_allclose(trace.recompute_feature_sum(model.fmap), trace.running_feature_sum, rtol=0, atol=0)

    def test_exact_and_generic_paths_agree(self):
        """Test the vectorized exact path matches per-step maximization."""
        model = random_mrf(RandomModelSpec(6, 3, seed=1))
        fast = herd_run(None, model.moments, model.fmap, ExactEnumerationMaximizer(), 300)
        slow_weights = model.moments.values.copy()
        maximizer = ExactEnumerationMaximizer()
        states = []
        for _ in range(300):
            state, slow_weights = herd_step(slow_weights, model.moments, model.fmap, maximizer)
            states.append(state.index)
        np.testing.assert_array_equal(fast.state_indices, states)
        np.testing.assert_array_equal(fast.final_weights, slow_weights)

    def test_learning_rate_invariance(self):
        """Test scaling w_0 and the update by eta leaves the samples unchanged."""
        model = random_mrf(RandomModelSpec(8, 3, seed=4))
        plain = herd_run(None, model.moments, model.fmap, ExactEnumerationMaximizer(), 500)
        scaled = herd_run(
            0.25 * model.moments.values, model.moments, model.fmap, ExactEnumerationMaximizer(), 500, learning_rate=0.25
        )
        np.testing.assert_array_equal(plain.state_indices, scaled.state_indices)

    def test_determinism(self):
        """Test identical inputs give identical traces."""
        model = random_mrf(RandomModelSpec(5, 2, seed=9))
        first = herd_run(None, model.moments, model.fmap, ExactEnumerationMaximizer(), 200)
        second = herd_run(None, model.moments, model.fmap, ExactEnumerationMaximizer(), 200)
        np.testing.assert_array_equal(first.samples, second.samples)
        np.testing.assert_array_equal(first.weight_norms, second.weight_norms)

    def test_snapshots(self):
        """Test snapshots at step 0, every stride and the last step."""
        fmap = TableFeatureMap.one_of_d(3)
        moments = MomentVector.for_features(fmap, [0.5, 0.25, 0.25])
        trace = herd_run(None, moments, fmap, ExactEnumerationMaximizer(), 25, TraceConfig(snapshot_stride=10))
        np.testing.assert_array_equal(trace.snapshot_steps, [0, 10, 20, 25])
        self.assertEqual(len(trace.weight_norms), 26)
        with self.assertRaises(ValueError):
            trace.weights_at_stride_one()

    def test_strict_pct_aborts(self):
        """Test strict verification stops a run on the first violation."""
        fmap = TableFeatureMap([[0.0], [1.0]])
        moments = MomentVector.for_features(fmap, [0.5])
        config = TraceConfig(strict_pct=True)
        with self.assertRaises(PctViolationError) as context:
            herd_run(np.array([1.0]), moments, fmap, CoordinateAscentMaximizer(max_sweeps=0), 10, config)
        self.assertEqual(context.exception.step, 1)

    def test_counted_pct_violations(self):
        """Test non-strict verification records violating steps."""
        fmap = TableFeatureMap([[0.0], [1.0]])
        moments = MomentVector.for_features(fmap, [0.5])
        trace = herd_run(np.array([1.0]), moments, fmap, CoordinateAscentMaximizer(max_sweeps=0), 3)
        self.assertEqual(trace.pct_violations, [1, 2, 3])

    def test_coordinate_ascent_on_rbm_has_no_violations(self):
        """Test local maximization from all-zeros still satisfies the cycling condition here."""
        fmap = rbm_features(3, 0)
        data = np.array([[1, 0, 1], [1, 1, 1], [0, 0, 1]])
        moments = MomentVector.from_data(fmap, data)
        trace = herd_run(None, moments, fmap, CoordinateAscentMaximizer(), 300)
        self.assertEqual(trace.pct_violations, [])

    def test_steps_must_be_positive(self):
        """Test T must be at least 1."""
        fmap = TableFeatureMap.one_of_d(2)
        moments = MomentVector.for_features(fmap, [0.5, 0.5])
        with self.assertRaises(ValueError):
            herd_run(None, moments, fmap, ExactEnumerationMaximizer(), 0)


class TestEngineHelpers(unittest.TestCase):
    def test_pct_violated(self):
        """Test the scaled tolerance of the cycling inequality."""
        w = np.array([1.0, 0.0])
        self.assertTrue(pct_violated(w, w))
        self.assertFalse(pct_violated(w, -w))
        self.assertFalse(pct_violated(w, np.array([0.0, 1.0])))

    def test_apply_update(self):
        """Test plain and scaled updates."""
        np.testing.assert_array_equal(apply_update(np.ones(2), np.ones(2), np.zeros(2)), [2.0, 2.0])
        np.testing.assert_array_equal(apply_update(np.ones(2), np.ones(2), np.zeros(2), 0.5), [1.5, 1.5])

    def test_tipi_value(self):
        """Test the zero-temperature likelihood."""
        fmap = TableFeatureMap(np.eye(2))
        moments = MomentVector.for_features(fmap, [0.5, 0.5])
        self.assertEqual(tipi_value(np.zeros(2), moments, fmap), 0.0)
        self.assertEqual(tipi_value(np.array([1.0, 0.0]), moments, fmap), -0.5)

    def test_tipi_value_never_positive(self):
        """Test the likelihood is at most 0 for feasible moments."""
        model = random_mrf(RandomModelSpec(6, 3, seed=2))
        rng = np.random.Generator(np.random.PCG64(0))
        for _ in range(20):
            self.assertLessEqual(tipi_value(rng.standard_normal(3), model.moments, model.fmap), 1e-12)

    def test_greedy_dual_matches_herding(self):
        """Test herding picks the greedy moment-matching state for constant-norm features."""
        fmap = TableFeatureMap.normalized(np.random.Generator(np.random.PCG64(6)).standard_normal((5, 3)))
        rng = np.random.Generator(np.random.PCG64(8))
        probabilities = rng.dirichlet(np.ones(5))
        moments = MomentVector.for_features(fmap, probabilities @ fmap.feature_table)
        trace = herd_run(None, moments, fmap, ExactEnumerationMaximizer(), 50)
        feature_sum = np.zeros(3)
        for step, index in enumerate(trace.state_indices):
            self.assertEqual(greedy_dual_choice(feature_sum, step, moments, fmap), index)
            feature_sum += fmap.feature_table[index]


if __name__ == "__main__":
    unittest.main()
