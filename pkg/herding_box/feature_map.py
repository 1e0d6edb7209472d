"""Feature maps: the bridge between model structure and the herding engine."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from functools import cached_property
from typing import Sequence, override

import numpy as np

from .exceptions import DimensionMismatchError, HerdingError, NonEnumerableError
from .state_space import State, StateSpace


class FeatureMap(ABC):
    """Abstract feature map ``phi: State -> R^K``.

    Implementations must be pure: the same assignment always yields a bit-identical vector.
    Feature maps are immutable after construction and safe to share between chains.
    """

    log = logging.getLogger(__name__)

    def __init__(self, space: StateSpace, dim: int, norm_bound: float | None = None) -> None:
        if dim < 1:
            raise DimensionMismatchError(f"Feature dimension must be >= 1, got {dim}")
        self.space = space
        self.dim = int(dim)
        self.norm_bound = norm_bound

    @abstractmethod
    def evaluate(self, assignment: Sequence[int] | np.ndarray) -> np.ndarray:
        """Feature vector of one assignment.

        Args:
            assignment: variable values, one per variable of ``space``

        Returns:
            Array of shape (dim,)
        """

    def __call__(self, state: State) -> np.ndarray:
        return self.evaluate(state.assignment)

    @property
    def enumerable(self) -> bool:
        return self.space.enumerable

    @property
    def n_states(self) -> int:
        if not self.enumerable:
            raise NonEnumerableError(f"{type(self).__name__} has {self.space.size} states, not enumerable")
        return self.space.size

    def evaluate_many(self, assignments: np.ndarray) -> np.ndarray:
        """Feature vectors of an (n, n_variables) array of assignments, shape (n, dim)."""
        assignments = np.asarray(assignments, dtype=np.int64)
        out = np.empty((len(assignments), self.dim), dtype=np.float64)
        for row, assignment in enumerate(assignments):
            out[row] = self.evaluate(assignment)
        return out

    @cached_property
    def feature_table(self) -> np.ndarray:
        """Features of every state in index order, shape (n_states, dim). Read-only."""
        table = self.evaluate_many(self.space.assignments)
        table.setflags(write=False)
        return table

    def score(self, weights: np.ndarray, assignment: Sequence[int] | np.ndarray) -> float:
        return float(np.dot(weights, self.evaluate(assignment)))

    def local_scores(self, weights: np.ndarray, assignment: np.ndarray, variable: int) -> np.ndarray:
        """Scores ``w^T phi`` for every value of ``variable`` with the other variables fixed."""
        candidate = np.array(assignment, dtype=np.int64)
        scores = np.empty(self.space.cardinalities[variable], dtype=np.float64)
        for value in range(len(scores)):
            candidate[variable] = value
            scores[value] = np.dot(weights, self.evaluate(candidate))
        return scores

    def check_norm_bound(self, tolerance: float = 1e-12) -> float:
        """Verify ``||phi(x)|| <= norm_bound`` over all states; returns the observed maximum norm."""
        observed = float(np.max(np.linalg.norm(self.feature_table, axis=1)))
        if self.norm_bound is not None and observed > self.norm_bound + tolerance:
            self.log.error("Feature norm %.17g exceeds declared bound %.17g", observed, self.norm_bound)
            raise HerdingError(f"Feature norm {observed!r} exceeds declared bound {self.norm_bound!r}")
        return observed


class TableFeatureMap(FeatureMap):
    """Feature map over a single discrete variable given by an explicit (D, K) table."""

    def __init__(self, table: np.ndarray, norm_bound: float | None = None) -> None:
        table = np.array(table, dtype=np.float64)
        if table.ndim != 2:
            raise DimensionMismatchError(f"Feature table must be 2-D, got shape {table.shape}")
        table.setflags(write=False)
        super().__init__(StateSpace.single(table.shape[0]), table.shape[1], norm_bound)
        self._table = table

    @classmethod
    def one_of_d(cls, size: int) -> TableFeatureMap:
        """1-of-D encoding of a single D-valued variable."""
        return cls(np.eye(size), norm_bound=1.0)

    @classmethod
    def normalized(cls, table: np.ndarray, radius: float = 1.0) -> TableFeatureMap:
        """Rows rescaled to a constant norm ``radius``."""
        table = np.asarray(table, dtype=np.float64)
        norms = np.linalg.norm(table, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise HerdingError("Cannot normalize a zero feature vector")
        return cls(radius * table / norms, norm_bound=radius)

    @override
    def evaluate(self, assignment: Sequence[int] | np.ndarray) -> np.ndarray:
        self.space.validate(assignment)
        return self._table[int(assignment[0])].copy()

    @override
    def evaluate_many(self, assignments: np.ndarray) -> np.ndarray:
        assignments = np.asarray(assignments, dtype=np.int64)
        return self._table[assignments[:, 0]].copy()

    @cached_property
    @override
    def feature_table(self) -> np.ndarray:
        return self._table

    @override
    def local_scores(self, weights: np.ndarray, assignment: np.ndarray, variable: int) -> np.ndarray:
        return self._table @ weights
