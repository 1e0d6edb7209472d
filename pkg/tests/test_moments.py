"""Tests for MomentVector."""

import unittest

import numpy as np

from herding_box.engine import herd_run
from herding_box.exceptions import DimensionMismatchError, MomentFeasibilityError
from herding_box.feature_map import TableFeatureMap
from herding_box.maximizer import ExactEnumerationMaximizer
from herding_box.moments import MomentVector, Provenance, hull_distance
from herding_box.models import IsingFeatureMap, IsingLattice


class TestMomentVector(unittest.TestCase):
    def test_values_are_immutable(self):
        """Test moment values cannot be modified after construction."""
        moments = MomentVector([0.5, 0.5])
        with self.assertRaises(ValueError):
            moments.values[0] = 1.0

    def test_interior_point_accepted(self):
        """Test a point inside the simplex is feasible."""
        fmap = TableFeatureMap.one_of_d(3)
        moments = MomentVector.for_features(fmap, [0.5, 0.25, 0.25])
        self.assertEqual(moments.dim, 3)
        self.assertEqual(moments.provenance, Provenance.ANALYTIC)

    def test_vertex_accepted(self):
        """Test a feature vector itself is feasible."""
        fmap = TableFeatureMap.one_of_d(3)
        MomentVector.for_features(fmap, [0.0, 1.0, 0.0])

    def test_outside_hull_rejected(self):
        """Test moments outside the convex hull raise."""
        fmap = TableFeatureMap.one_of_d(3)
        with self.assertRaisesRegex(MomentFeasibilityError, "convex hull"):
            MomentVector.for_features(fmap, [0.6, 0.6, 0.0])

    def test_direct_construction_is_checked_before_herding(self):
        """Test moments built without a feature map are validated when a run starts."""
        fmap = TableFeatureMap.one_of_d(3)
        moments = MomentVector([0.6, 0.6, 0.0])
        self.assertFalse(moments.checked)
        with self.assertRaisesRegex(MomentFeasibilityError, "convex hull"):
            herd_run(None, moments, fmap, ExactEnumerationMaximizer(), 10)
        with self.assertRaisesRegex(MomentFeasibilityError, "convex hull"):
            moments.validated_for(fmap)
        checked = MomentVector([0.5, 0.25, 0.25]).validated_for(fmap)
        self.assertTrue(checked.checked)
        self.assertIs(checked.validated_for(fmap), checked)

    def test_non_finite_values_rejected(self):
        """Test NaN and infinite moments are refused at construction."""
        for value in (np.nan, np.inf):
            with self.subTest(value=value):
                with self.assertRaisesRegex(MomentFeasibilityError, "finite"):
                    MomentVector([0.5, value])

    def test_feasibility_check_can_be_skipped(self):
        """Test oracle estimates and explicit opt-out skip the hull check."""
        fmap = TableFeatureMap.one_of_d(2)
        MomentVector.for_features(fmap, [0.7, 0.7], Provenance.ORACLE_ESTIMATE)
        MomentVector.for_features(fmap, [0.7, 0.7], check_feasible=False)

    def test_non_enumerable_space_skips_hull(self):
        """Test large spaces are not enumerated for the hull check."""
        fmap = IsingFeatureMap(IsingLattice(5, 5))
        moments = MomentVector.for_features(fmap, np.zeros(fmap.dim))
        self.assertEqual(moments.dim, 25 + 50)

    def test_dimension_mismatch(self):
        """Test moments must match the feature dimension."""
        fmap = TableFeatureMap.one_of_d(3)
        with self.assertRaises(DimensionMismatchError):
            MomentVector.for_features(fmap, [0.5, 0.5])
        with self.assertRaises(DimensionMismatchError):
            MomentVector([0.5, 0.5], names=("a",))

    def test_from_data(self):
        """Test data-average moments."""
        fmap = TableFeatureMap.one_of_d(3)
        moments = MomentVector.from_data(fmap, np.array([[0], [0], [2], [1]]))
        np.testing.assert_array_equal(moments.values, [0.5, 0.25, 0.25])
        self.assertEqual(moments.provenance, Provenance.DATA_AVERAGE)
        with self.assertRaises(MomentFeasibilityError):
            MomentVector.from_data(fmap, np.zeros((0, 1), dtype=np.int64))

    def test_hull_distance(self):
        """Test the L1 distance to the hull of the unit vectors."""
        table = np.eye(2)
        self.assertAlmostEqual(hull_distance(table, np.array([0.5, 0.5])), 0.0, places=9)
        self.assertAlmostEqual(hull_distance(table, np.array([1.0, 1.0])), 1.0, places=9)


if __name__ == "__main__":
    unittest.main()
