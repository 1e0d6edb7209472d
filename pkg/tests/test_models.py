"""Tests for problem generators and the Ising moment oracle."""

import math
import time
import unittest

import numpy as np

from herding_box.models import (
    BETA_CRITICAL,
    IsingConfig,
    IsingLattice,
    RandomModelSpec,
    component_size_histogram,
    exact_edge_moment,
    ising_herd_run,
    random_mrf,
    swendsen_wang_sample,
)
from herding_box.models.ising import component_sizes
from herding_box.moments import Provenance


class TestRandomMrf(unittest.TestCase):
    def test_same_seed_same_model(self):
        """Test models are reproducible from the seed."""
        first = random_mrf(RandomModelSpec(4, 2, seed=7))
        second = random_mrf(RandomModelSpec(4, 2, seed=7))
        np.testing.assert_array_equal(first.fmap.feature_table, second.fmap.feature_table)
        np.testing.assert_array_equal(first.moments.values, second.moments.values)
        self.assertEqual(first.moments.provenance, Provenance.ANALYTIC)

    def test_different_seeds_differ(self):
        """Test the seed changes the features."""
        first = random_mrf(RandomModelSpec(10, 7, seed=1))
        second = random_mrf(RandomModelSpec(10, 7, seed=2))
        self.assertFalse(np.array_equal(first.fmap.feature_table, second.fmap.feature_table))

    def test_zero_scale_is_uniform(self):
        """Test weight scale 0 gives the mean feature vector."""
        model = random_mrf(RandomModelSpec(10, 7, seed=3, weight_scale=0.0))
        np.testing.assert_allclose(model.distribution, np.full(10, 0.1))
        np.testing.assert_allclose(model.moments.values, model.fmap.feature_table.mean(axis=0), atol=1e-12)

    def test_moments_are_model_expectations(self):
        """Test moments equal the distribution-weighted features."""
        model = random_mrf(RandomModelSpec(6, 3, seed=4))
        self.assertAlmostEqual(float(model.distribution.sum()), 1.0, places=12)
        np.testing.assert_allclose(model.moments.values, model.distribution @ model.fmap.feature_table)

    def test_invalid_spec(self):
        """Test sizes and scale are validated."""
        with self.assertRaises(ValueError):
            RandomModelSpec(0, 2)
        with self.assertRaises(ValueError):
            RandomModelSpec(3, 2, weight_scale=-1.0)


class TestSwendsenWang(unittest.TestCase):
    def test_infinite_temperature(self):
        """Test beta=0 gives independent spins with edge moment near 0."""
        lattice = IsingLattice(8, 8)
        steps = 500
        result = swendsen_wang_sample(lattice, 0.0, steps, seed=1)
        self.assertLess(abs(result.edge_moment), 4.0 / math.sqrt(steps * lattice.n_edges))
        self.assertEqual(result.spins.shape, (steps, 64))

    def test_zero_temperature(self):
        """Test a very large beta aligns every edge."""
        result = swendsen_wang_sample(IsingLattice(8, 8), 10.0, 200, seed=2)
        self.assertGreater(result.edge_moment, 1.0 - 1e-3)

    def test_matches_exact_enumeration(self):
        """Test the chain estimate agrees with the enumerated edge moment."""
        lattice = IsingLattice(3, 3)
        exact = exact_edge_moment(lattice, 0.3)
        result = swendsen_wang_sample(lattice, 0.3, 5000, seed=3)
        self.assertLess(abs(result.edge_moment - exact), 5.0 * result.standard_error + 1e-3)

    def test_exact_edge_moment_limits(self):
        """Test enumeration at beta 0 and the site limit."""
        self.assertAlmostEqual(exact_edge_moment(IsingLattice(2, 3), 0.0), 0.0, places=12)
        self.assertGreater(exact_edge_moment(IsingLattice(2, 3), 5.0), 0.99)
        with self.assertRaises(ValueError):
            exact_edge_moment(IsingLattice(5, 5), 0.1)

    def test_invalid_arguments(self):
        """Test negative beta and empty runs are rejected."""
        with self.assertRaises(ValueError):
            swendsen_wang_sample(IsingLattice(3, 3), -0.1, 10)
        with self.assertRaises(ValueError):
            swendsen_wang_sample(IsingLattice(3, 3), 0.1, 0)


class TestIsingHerding(unittest.TestCase):
    def test_fair_spins_target(self):
        """Test node and edge averages approach 0 within 2R/T."""
        trace, fmap, moments = ising_herd_run(IsingConfig(IsingLattice(4, 4), snapshot_stride=50), 400)
        gap = np.abs(trace.running_feature_sum / trace.steps - moments.values)
        self.assertTrue(np.all(gap <= 2.0 * trace.max_weight_inf_norm / trace.steps + 1e-12))
        self.assertEqual(fmap.dim, 16 + 32)

    def test_oracle_edge_moment(self):
        """Test herding matches the Swendsen-Wang edge moment at the critical coupling."""
        lattice = IsingLattice(4, 4)
        edge_moment = swendsen_wang_sample(lattice, BETA_CRITICAL, 500, seed=4).edge_moment
        trace, _, moments = ising_herd_run(IsingConfig(lattice, 0.0, edge_moment), 400)
        edge_average = trace.running_feature_sum[16:].mean() / trace.steps
        self.assertLessEqual(abs(edge_average - edge_moment), 2.0 * trace.max_weight_inf_norm / trace.steps + 1e-12)
        self.assertEqual(moments.provenance, Provenance.ORACLE_ESTIMATE)

    def test_critical_lattice_self_consistency(self):
        """Test a 16x16 lattice fed the critical edge moment reproduces it within 2R/T at T = 10^4."""
        started = time.perf_counter()
        lattice = IsingLattice(16, 16)
        edge_moment = swendsen_wang_sample(lattice, BETA_CRITICAL, 1000, seed=5).edge_moment
        config = IsingConfig(lattice, 0.0, edge_moment, snapshot_stride=1000)
        trace, _, moments = ising_herd_run(config, 10_000)
        bound = 2.0 * trace.max_weight_inf_norm / trace.steps + 1e-12
        gap = np.abs(trace.running_feature_sum / trace.steps - moments.values)
        self.assertTrue(np.all(gap <= bound))
        edge_average = trace.running_feature_sum[lattice.n_sites :].mean() / trace.steps
        self.assertLessEqual(abs(edge_average - edge_moment), bound)

        histogram = component_size_histogram(trace.samples[::10], lattice)
        self.assertIsNotNone(histogram.slope)
        self.assertLess(histogram.slope, 0.0)
        self.assertLess(time.perf_counter() - started, 300.0)

    def test_invalid_moments(self):
        """Test moments outside [-1, 1] are rejected."""
        with self.assertRaises(ValueError):
            IsingConfig(IsingLattice(3, 3), node_moment=1.5)


class TestComponentHistogram(unittest.TestCase):
    def test_aligned_lattice_is_one_component(self):
        """Test equal spins form one component."""
        lattice = IsingLattice(3, 3)
        np.testing.assert_array_equal(component_sizes(np.ones(9), lattice), [9])
        histogram = component_size_histogram(np.ones((2, 9)), lattice)
        np.testing.assert_array_equal(histogram.sizes, [9])
        np.testing.assert_array_equal(histogram.counts, [2])
        self.assertIsNone(histogram.slope)

    def test_checkerboard(self):
        """Test a checkerboard has only single-site components."""
        lattice = IsingLattice(4, 4)
        board = (np.add.outer(np.arange(4), np.arange(4)) % 2).reshape(-1)
        np.testing.assert_array_equal(component_sizes(board, lattice), np.ones(16))

    def test_slope_fit(self):
        """Test a histogram with several sizes has a slope."""
        lattice = IsingLattice(1, 6, periodic=False)
        histogram = component_size_histogram(np.array([[1, 1, 0, 1, 0, 0], [1, 0, 0, 0, 1, 1]]), lattice)
        np.testing.assert_array_equal(histogram.sizes, [1, 2, 3])
        np.testing.assert_array_equal(histogram.counts, [3, 3, 1])
        self.assertIsNotNone(histogram.slope)


if __name__ == "__main__":
    unittest.main()
