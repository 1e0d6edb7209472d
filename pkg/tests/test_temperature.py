"""Tests for the finite-temperature map and period detection."""

import unittest

import numpy as np

from herding_box.engine import herd_step
from herding_box.feature_map import TableFeatureMap
from herding_box.maximizer import ExactEnumerationMaximizer
from herding_box.models import RandomModelSpec, random_mrf
from herding_box.moments import MomentVector
from herding_box.temperature import (
    BifurcationPoint,
    bifurcation_point,
    bifurcation_scan,
    detect_period,
    expected_features_at_temperature,
    period_sequence,
    temperature_map_step,
    temperature_orbit,
)


class TestExpectedFeatures(unittest.TestCase):
    def setUp(self):
        self.fmap = TableFeatureMap([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0], [0.5, 0.5]])

    def test_zero_weights_give_uniform_average(self):
        """Test w=0 averages every feature vector."""
        expected = expected_features_at_temperature(np.zeros(2), self.fmap, 0.7)
        np.testing.assert_allclose(expected, self.fmap.feature_table.mean(axis=0), atol=1e-15)

    def test_high_temperature_limit(self):
        """Test very high temperatures approach the uniform average."""
        expected = expected_features_at_temperature(np.array([3.0, -2.0]), self.fmap, 1e8)
        np.testing.assert_allclose(expected, self.fmap.feature_table.mean(axis=0), atol=1e-6)

    def test_low_temperature_limit(self):
        """Test very low temperatures approach the argmax features."""
        expected = expected_features_at_temperature(np.array([3.0, -2.0]), self.fmap, 1e-8)
        np.testing.assert_allclose(expected, [1.0, 0.0], atol=1e-6)

    def test_no_overflow_at_large_logits(self):
        """Test log-sum-exp keeps huge logits finite."""
        expected = expected_features_at_temperature(np.array([1e6, 0.0]), self.fmap, 1e-6)
        self.assertTrue(np.all(np.isfinite(expected)))

    def test_temperature_must_be_positive(self):
        """Test T <= 0 is rejected."""
        for temperature in (0.0, -1.0):
            with self.subTest(temperature=temperature):
                with self.assertRaises(ValueError):
                    expected_features_at_temperature(np.zeros(2), self.fmap, temperature)


class TestTemperatureMap(unittest.TestCase):
    def test_small_temperature_matches_herding(self):
        """Test the map converges to the herding update as T goes to 0."""
        model = random_mrf(RandomModelSpec(4, 2, seed=7))
        weights = np.array([0.3, -0.8])
        _, herded = herd_step(weights, model.moments, model.fmap, ExactEnumerationMaximizer())
        mapped = temperature_map_step(weights, model.moments, model.fmap, 1e-9)
        np.testing.assert_allclose(mapped, herded, atol=1e-9)

    def test_orbit_shape(self):
        """Test the orbit holds w_0..w_steps."""
        model = random_mrf(RandomModelSpec(4, 2, seed=7))
        orbit = temperature_orbit(model.moments.values, model.moments, model.fmap, 0.5, 10)
        self.assertEqual(orbit.shape, (11, 2))
        np.testing.assert_array_equal(orbit[0], model.moments.values)


class TestDetectPeriod(unittest.TestCase):
    def test_constant_orbit(self):
        """Test a fixed point has period 1."""
        orbit = np.ones((200, 2))
        self.assertEqual(detect_period(orbit, consecutive=50, max_period=20), 1)

    def test_cycle_of_three(self):
        """Test a repeating three-point cycle."""
        orbit = np.tile(np.array([[0.0, 1.0], [1.0, 0.0], [0.5, 0.5]]), (100, 1))
        self.assertEqual(detect_period(orbit, consecutive=50, max_period=20), 3)

    def test_aperiodic(self):
        """Test an irrational rotation has no period at the horizon."""
        orbit = (np.arange(500)[:, np.newaxis] * (np.sqrt(5.0) - 1.0) / 2.0) % 1.0
        self.assertIsNone(detect_period(orbit, consecutive=100, max_period=64))

    def test_orbit_too_short(self):
        """Test short orbits are rejected."""
        with self.assertRaisesRegex(ValueError, "too short"):
            detect_period(np.ones((10, 1)), consecutive=10, max_period=5)


class TestBifurcation(unittest.TestCase):
    """A binary neuron at rate 0.3 loses its fixed point near T = 0.105."""

    def setUp(self):
        self.fmap = TableFeatureMap([[0.0], [1.0]])
        self.moments = MomentVector.for_features(self.fmap, [0.3])

    def test_fixed_point_at_high_temperature(self):
        """Test period 1 above the first doubling."""
        point = bifurcation_point(self.moments, self.fmap, 1.0, burn_in=2000, max_period=16, consecutive=50)
        self.assertEqual(point.period, 1)
        self.assertAlmostEqual(float(point.attractor[0, 0]), float(np.log(0.3 / 0.7)), places=6)

    def test_period_two_below_first_doubling(self):
        """Test period 2 just below the first doubling."""
        point = bifurcation_point(self.moments, self.fmap, 0.1, burn_in=2000, max_period=16, consecutive=50)
        self.assertEqual(point.period, 2)

    def test_scan_parallel_matches_serial(self):
        """Test the thread pool returns the serial results in input order."""
        temperatures = np.array([1.0, 0.5, 0.1, 0.2])
        serial = bifurcation_scan(self.moments, self.fmap, temperatures, burn_in=500, max_period=8, consecutive=20)
        parallel = bifurcation_scan(
            self.moments, self.fmap, temperatures, burn_in=500, max_period=8, consecutive=20, max_workers=3
        )
        self.assertEqual([p.temperature for p in parallel], [1.0, 0.5, 0.1, 0.2])
        self.assertEqual([p.period for p in serial], [p.period for p in parallel])
        for a, b in zip(serial, parallel):
            np.testing.assert_array_equal(a.attractor, b.attractor)

    def test_period_sequence(self):
        """Test consecutive duplicates collapse."""
        empty = np.zeros((0, 1))
        points = [BifurcationPoint(t, p, empty) for t, p in [(4, 1), (3, 1), (2, 2), (1.5, 4), (1, None), (0.5, None)]]
        self.assertEqual(period_sequence(points), [1, 2, 4, None])


class TestDoublingCascade(unittest.TestCase):
    def test_doubling_cascade_on_random_model(self):
        """Test periods 1, 2 and 4 appear at decreasing T, then no period up to 1024."""
        model = random_mrf(RandomModelSpec(4, 2, seed=7))
        temperatures = np.linspace(0.5, 0.02, 60)
        points = bifurcation_scan(model.moments, model.fmap, temperatures, burn_in=3000, max_workers=4)
        periods = [point.period for point in points]
        # T = 0.500 and 0.272: fixed point; 0.256 .. 0.199: period 2; 0.191: period 4
        self.assertEqual(periods[0], 1)
        self.assertEqual(periods[28], 1)
        self.assertEqual(periods[30:38], [2] * 8)
        self.assertEqual(periods[38], 4)
        self.assertEqual(period_sequence([points[0], points[28], *points[30:39]]), [1, 2, 4])
        self.assertIn(None, periods[39:])


if __name__ == "__main__":
    unittest.main()
