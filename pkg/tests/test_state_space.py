"""Tests for StateSpace and State."""

import unittest

import numpy as np

from herding_box.exceptions import NonEnumerableError, StateSpaceError
from herding_box.state_space import MAX_ENUMERABLE_STATES, StateSpace


class TestStateSpaceIndexing(unittest.TestCase):
    """Mixed-radix index of assignments."""

    def setUp(self):
        self.space = StateSpace((2, 3, 2))

    def test_size_and_variables(self):
        """Test size is the product of the cardinalities."""
        self.assertEqual(self.space.size, 12)
        self.assertEqual(self.space.n_variables, 3)
        self.assertTrue(self.space.enumerable)

    def test_first_variable_is_most_significant(self):
        """Test index order equals lexicographic order of assignments."""
        self.assertEqual(self.space.index_of((0, 0, 0)), 0)
        self.assertEqual(self.space.index_of((0, 0, 1)), 1)
        self.assertEqual(self.space.index_of((0, 1, 0)), 2)
        self.assertEqual(self.space.index_of((1, 0, 0)), 6)
        self.assertEqual(self.space.index_of((1, 2, 1)), 11)

    def test_assignment_of_inverts_index_of(self):
        """Test every index maps back to its assignment."""
        for index in range(self.space.size):
            with self.subTest(index=index):
                self.assertEqual(self.space.index_of(self.space.assignment_of(index)), index)

    def test_assignments_table_in_index_order(self):
        """Test the enumerated table agrees with assignment_of."""
        table = self.space.assignments
        self.assertEqual(table.shape, (12, 3))
        for index, row in enumerate(table):
            self.assertEqual(tuple(int(v) for v in row), self.space.assignment_of(index))

    def test_indices_of_vectorized(self):
        """Test the vectorized index matches the scalar one."""
        table = self.space.assignments
        np.testing.assert_array_equal(self.space.indices_of(table), np.arange(12))
        self.assertEqual(len(self.space.indices_of(np.zeros((0, 3), dtype=np.int64))), 0)

    def test_state_carries_index(self):
        """Test states of enumerable spaces know their index."""
        state = self.space.state((1, 1, 0))
        self.assertEqual(state.index, 8)
        np.testing.assert_array_equal(state.as_array(), [1, 1, 0])
        self.assertEqual(self.space.zeros().index, 0)

    def test_iteration_yields_all_states(self):
        """Test iteration visits states in index order."""
        self.assertEqual([s.index for s in self.space], list(range(12)))


class TestStateSpaceValidation(unittest.TestCase):
    """Invalid spaces and assignments."""

    def test_zero_cardinality_rejected(self):
        """Test cardinalities must be positive."""
        with self.assertRaisesRegex(StateSpaceError, "Cardinalities"):
            StateSpace((2, 0))

    def test_name_count_mismatch(self):
        """Test names must match the variables."""
        with self.assertRaisesRegex(StateSpaceError, "names"):
            StateSpace((2, 2), ("a",))

    def test_value_out_of_range(self):
        """Test values outside a domain are rejected."""
        space = StateSpace((2, 2))
        with self.assertRaisesRegex(StateSpaceError, "outside"):
            space.index_of((0, 2))
        with self.assertRaisesRegex(StateSpaceError, "outside"):
            space.assignment_of(4)

    def test_wrong_length(self):
        """Test assignments must cover every variable."""
        with self.assertRaisesRegex(StateSpaceError, "values"):
            StateSpace((2, 2)).validate((0,))

    def test_large_space_not_enumerable(self):
        """Test spaces above the enumeration limit refuse to enumerate."""
        space = StateSpace((2,) * 21)
        self.assertGreater(space.size, MAX_ENUMERABLE_STATES)
        self.assertFalse(space.enumerable)
        self.assertIsNone(space.state((0,) * 21).index)
        with self.assertRaises(NonEnumerableError):
            _ = space.assignments

    def test_equality_by_cardinalities(self):
        """Test spaces compare by their cardinalities."""
        self.assertEqual(StateSpace((2, 3)), StateSpace((2, 3), ("a", "b")))
        self.assertNotEqual(StateSpace((2, 3)), StateSpace((3, 2)))
        self.assertEqual(StateSpace.single(4).cardinalities, (4,))


if __name__ == "__main__":
    unittest.main()
