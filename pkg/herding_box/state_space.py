"""Discrete state spaces and states."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .exceptions import NonEnumerableError, StateSpaceError

# Above this many joint states a space is treated as non-enumerable.
MAX_ENUMERABLE_STATES = 1 << 20


@dataclass(frozen=True)
class State:
    """A joint assignment of discrete variables.

    Values are indices ``0..cardinality-1``. ``index`` is set for states of enumerable spaces.
    """

    assignment: tuple[int, ...]
    index: int | None = None

    def as_array(self) -> np.ndarray:
        return np.asarray(self.assignment, dtype=np.int64)


class StateSpace:
    """Product of finite variable domains with a mixed-radix state index.

    The first variable is the most significant digit, so index order equals lexicographic
    order of assignments. Index 0 is the all-zeros assignment.
    """

    def __init__(self, cardinalities: Sequence[int], names: Sequence[str] | None = None) -> None:
        cards = tuple(int(c) for c in cardinalities)
        if any(c < 1 for c in cards):
            raise StateSpaceError(f"Cardinalities must be >= 1, got {cards}")
        if names is not None and len(names) != len(cards):
            raise StateSpaceError(f"Got {len(names)} names for {len(cards)} variables")
        self.cardinalities: tuple[int, ...] = cards
        self.names: tuple[str, ...] = tuple(names) if names is not None else tuple(f"v{i}" for i in range(len(cards)))

    @classmethod
    def single(cls, size: int) -> StateSpace:
        """A space with one variable of ``size`` values."""
        return cls((size,), ("x",))

    def __repr__(self) -> str:
        return f"StateSpace(cardinalities={self.cardinalities})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, StateSpace) and other.cardinalities == self.cardinalities

    def __hash__(self) -> int:
        return hash(self.cardinalities)

    @property
    def n_variables(self) -> int:
        return len(self.cardinalities)

    @cached_property
    def size(self) -> int:
        return math.prod(self.cardinalities)

    @property
    def enumerable(self) -> bool:
        return self.size <= MAX_ENUMERABLE_STATES

    def validate(self, assignment: Sequence[int]) -> None:
        if len(assignment) != self.n_variables:
            raise StateSpaceError(f"Assignment has {len(assignment)} values, space has {self.n_variables} variables")
        for position, (value, card) in enumerate(zip(assignment, self.cardinalities)):
            if not 0 <= value < card:
                raise StateSpaceError(f"Variable {self.names[position]} value {value} outside 0..{card - 1}")

    def index_of(self, assignment: Sequence[int]) -> int:
        self.validate(assignment)
        index = 0
        for value, card in zip(assignment, self.cardinalities):
            index = index * card + int(value)
        return index

    def assignment_of(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size:
            raise StateSpaceError(f"State index {index} outside 0..{self.size - 1}")
        values = []
        for card in reversed(self.cardinalities):
            index, value = divmod(index, card)
            values.append(value)
        return tuple(reversed(values))

    def state(self, assignment: Sequence[int]) -> State:
        values = tuple(int(v) for v in assignment)
        self.validate(values)
        return State(values, self.index_of(values) if self.enumerable else None)

    def state_at(self, index: int) -> State:
        return State(self.assignment_of(index), index)

    def zeros(self) -> State:
        return self.state((0,) * self.n_variables)

    @cached_property
    def assignments(self) -> np.ndarray:
        """All assignments in index order, shape (size, n_variables)."""
        if not self.enumerable:
            raise NonEnumerableError(f"State space with {self.size} states is not enumerable")
        grids = np.indices(self.cardinalities).reshape(self.n_variables, -1).T
        return np.ascontiguousarray(grids, dtype=np.int64)

    def __iter__(self) -> Iterator[State]:
        for index, row in enumerate(self.assignments):
            yield State(tuple(int(v) for v in row), index)

    def indices_of(self, assignments: np.ndarray) -> np.ndarray:
        """Vectorized ``index_of`` for an (n, n_variables) array."""
        assignments = np.asarray(assignments, dtype=np.int64)
        if assignments.ndim != 2 or assignments.shape[1] != self.n_variables:
            raise StateSpaceError(f"Expected shape (n, {self.n_variables}), got {assignments.shape}")
        if len(assignments) == 0:
            return np.zeros(0, dtype=np.int64)
        return np.ravel_multi_index(tuple(assignments.T), self.cardinalities).astype(np.int64)
