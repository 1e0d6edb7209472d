"""Maximizer strategies producing the (full or partial) argmax state of ``w^T phi``."""

from __future__ import annotations

import copy
import logging
from abc import ABC, abstractmethod
from typing import Any, ClassVar, Mapping, Sequence, override

import numpy as np

from .exceptions import StateSpaceError
from .feature_map import FeatureMap
from .state_space import State

# Default sweep cap of coordinate ascent.
DEFAULT_MAX_SWEEPS = 100


class Maximizer(ABC):
    """Abstract maximizer of ``w^T phi(x)`` over a feature map's state space.

    The contract is the perceptron cycling condition: the returned state ``s`` must satisfy
    ``w^T phi(s) >= w^T phi_bar``. Exact maximizers guarantee it; local ones are checked by the
    engine. ``clamp`` fixes variables (index -> value); ``init`` warm-starts local search.
    """

    kind: ClassVar[str]
    exact: ClassVar[bool] = False

    @classmethod
    @abstractmethod
    def create(cls, parameters: Mapping[str, Any]) -> Maximizer:
        """Factory method used by the registry.

        Args:
            parameters: Keyword settings of the concrete maximizer

        Returns:
            A new maximizer instance
        """

    @abstractmethod
    def maximize(
        self,
        weights: np.ndarray,
        fmap: FeatureMap,
        *,
        init: Sequence[int] | np.ndarray | None = None,
        clamp: Mapping[int, int] | None = None,
    ) -> State:
        """Return a state maximizing (or improving) ``weights^T phi`` over the free variables."""

    def reset(self) -> None:
        """Forget any state kept between calls."""

    def fork(self) -> Maximizer:
        """Independent copy with its own call state, for use from one worker thread."""
        worker = copy.copy(self)
        worker.reset()
        return worker

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class ExactEnumerationMaximizer(Maximizer):
    """True argmax by enumeration; ties go to the lowest state index."""

    kind = "exact-enumeration"
    exact = True
    log = logging.getLogger(__name__)

    def __init__(self) -> None:
        self._clamp_cache: dict[tuple[int, tuple[tuple[int, int], ...]], np.ndarray] = {}
        self._fmaps: dict[int, FeatureMap] = {}

    @classmethod
    @override
    def create(cls, parameters: Mapping[str, Any]) -> Maximizer:
        return cls()

    def _candidates(self, fmap: FeatureMap, clamp: Mapping[int, int]) -> np.ndarray:
        key = (id(fmap), tuple(sorted((int(k), int(v)) for k, v in clamp.items())))
        candidates = self._clamp_cache.get(key)
        if candidates is None:
            assignments = fmap.space.assignments
            mask = np.ones(len(assignments), dtype=bool)
            for variable, value in key[1]:
                mask &= assignments[:, variable] == value
            candidates = np.flatnonzero(mask)
            if len(candidates) == 0:
                raise StateSpaceError(f"Clamp {dict(key[1])} admits no state")
            self._clamp_cache[key] = candidates
            # keeps the id stable for the cache's lifetime
            self._fmaps[id(fmap)] = fmap
        return candidates

    @override
    def maximize(
        self,
        weights: np.ndarray,
        fmap: FeatureMap,
        *,
        init: Sequence[int] | np.ndarray | None = None,
        clamp: Mapping[int, int] | None = None,
    ) -> State:
        table = fmap.feature_table
        if clamp:
            candidates = self._candidates(fmap, clamp)
            index = int(candidates[int(np.argmax(table[candidates] @ weights))])
        else:
            index = int(np.argmax(table @ weights))
        return fmap.space.state_at(index)


class CoordinateAscentMaximizer(Maximizer):
    """Coordinate ascent in a fixed variable order.

    Each variable moves to its best value only on strict improvement, so the score never
    drops below that of the initial state. Sweeps repeat until no variable changes or
    ``max_sweeps`` is reached.
    """

    kind = "coordinate-ascent"
    log = logging.getLogger(__name__)

    def __init__(self, sweep_order: Sequence[int] | None = None, max_sweeps: int = DEFAULT_MAX_SWEEPS) -> None:
        if max_sweeps < 0:
            raise ValueError(f"max_sweeps must be >= 0, got {max_sweeps}")
        self.sweep_order: tuple[int, ...] | None = tuple(sweep_order) if sweep_order is not None else None
        self.max_sweeps = int(max_sweeps)
        self.last_sweeps = 0

    @classmethod
    @override
    def create(cls, parameters: Mapping[str, Any]) -> Maximizer:
        return cls(sweep_order=parameters.get("sweep_order"), max_sweeps=int(parameters.get("max_sweeps", 100)))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(max_sweeps={self.max_sweeps})"

    def _start(
        self, fmap: FeatureMap, init: Sequence[int] | np.ndarray | None, clamp: Mapping[int, int] | None
    ) -> np.ndarray:
        current = (
            np.zeros(fmap.space.n_variables, dtype=np.int64) if init is None else np.array(init, dtype=np.int64)
        )
        for variable, value in (clamp or {}).items():
            current[variable] = value
        fmap.space.validate(current)
        return current

    def ascend(
        self, weights: np.ndarray, fmap: FeatureMap, start: np.ndarray, clamp: Mapping[int, int] | None
    ) -> State:
        current = start
        order = self.sweep_order if self.sweep_order is not None else range(fmap.space.n_variables)
        free = [v for v in order if not clamp or v not in clamp]
        sweeps = 0
        while sweeps < self.max_sweeps:
            sweeps += 1
            changed = False
            for variable in free:
                scores = fmap.local_scores(weights, current, variable)
                best = int(np.argmax(scores))
                if scores[best] > scores[current[variable]]:
                    current[variable] = best
                    changed = True
            if not changed:
                break
        self.last_sweeps = sweeps
        return fmap.space.state(current)

    @override
    def maximize(
        self,
        weights: np.ndarray,
        fmap: FeatureMap,
        *,
        init: Sequence[int] | np.ndarray | None = None,
        clamp: Mapping[int, int] | None = None,
    ) -> State:
        return self.ascend(weights, fmap, self._start(fmap, init, clamp), clamp)


class PersistentCoordinateAscentMaximizer(CoordinateAscentMaximizer):
    """Coordinate ascent warm-started from the state it returned last time."""

    kind = "persistent-coordinate-ascent"

    def __init__(self, sweep_order: Sequence[int] | None = None, max_sweeps: int = DEFAULT_MAX_SWEEPS) -> None:
        super().__init__(sweep_order, max_sweeps)
        self.persistent_state: State | None = None

    @override
    def maximize(
        self,
        weights: np.ndarray,
        fmap: FeatureMap,
        *,
        init: Sequence[int] | np.ndarray | None = None,
        clamp: Mapping[int, int] | None = None,
    ) -> State:
        if init is None and self.persistent_state is not None:
            init = self.persistent_state.assignment
        state = super().maximize(weights, fmap, init=init, clamp=clamp)
        self.persistent_state = state
        return state

    @override
    def reset(self) -> None:
        self.persistent_state = None


class DataInitializedMaximizer(CoordinateAscentMaximizer):
    """Coordinate ascent started at the highest-scoring data case.

    Since the best data case scores at least the data average, the returned state satisfies the
    perceptron cycling condition for data-average moments.
    """

    kind = "data-initialized"

    def __init__(
        self,
        data: np.ndarray,
        sweep_order: Sequence[int] | None = None,
        max_sweeps: int = DEFAULT_MAX_SWEEPS,
    ) -> None:
        super().__init__(sweep_order, max_sweeps)
        self.data = np.array(data, dtype=np.int64)
        if self.data.ndim != 2 or len(self.data) == 0:
            raise StateSpaceError(f"Data must be a non-empty (n, n_variables) array, got shape {self.data.shape}")

    @classmethod
    @override
    def create(cls, parameters: Mapping[str, Any]) -> Maximizer:
        if "data" not in parameters:
            raise ValueError("data-initialized maximizer requires 'data'")
        return cls(
            parameters["data"],
            sweep_order=parameters.get("sweep_order"),
            max_sweeps=int(parameters.get("max_sweeps", DEFAULT_MAX_SWEEPS)),
        )

    @override
    def maximize(
        self,
        weights: np.ndarray,
        fmap: FeatureMap,
        *,
        init: Sequence[int] | np.ndarray | None = None,
        clamp: Mapping[int, int] | None = None,
    ) -> State:
        if init is None:
            scores = fmap.evaluate_many(self.data) @ weights
            init = self.data[int(np.argmax(scores))]
        return super().maximize(weights, fmap, init=init, clamp=clamp)
