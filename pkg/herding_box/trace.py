"""Herding traces: samples, weight snapshots, running feature sums and PCT flags."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .feature_map import FeatureMap
from .moments import MomentVector
from .state_space import State, StateSpace

DEFAULT_SNAPSHOT_STRIDE = 100


@dataclass(frozen=True)
class TraceConfig:
    """Recording and verification settings of a run.

    ``verify=None`` turns PCT verification on for non-exact maximizers only. With
    ``strict_pct`` a violation raises; otherwise it is counted and the run continues.
    """

    snapshot_stride: int = DEFAULT_SNAPSHOT_STRIDE
    verify: bool | None = None
    strict_pct: bool = False

    def __post_init__(self) -> None:
        if self.snapshot_stride < 1:
            raise ValueError(f"snapshot_stride must be >= 1, got {self.snapshot_stride}")

    def verification_enabled(self, exact: bool) -> bool:
        return (not exact) if self.verify is None else self.verify


@dataclass(eq=False)
class HerdingTrace:
    """Time-ordered record of one herding chain.

    ``samples`` holds assignments (T, n_variables). ``weight_norms`` and ``weight_inf_norms``
    hold ``||w_t||`` for t = 0..T. Snapshots are taken at step 0, every ``snapshot_stride`` steps
    and at the last step.
    """

    space: StateSpace
    samples: np.ndarray
    running_feature_sum: np.ndarray
    snapshot_steps: np.ndarray
    snapshot_weights: np.ndarray
    pct_violations: list[int]
    weight_norms: np.ndarray
    weight_inf_norms: np.ndarray
    initial_weights: np.ndarray
    final_weights: np.ndarray
    metadata: dict[str, object] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def steps(self) -> int:
        return len(self.samples)

    @property
    def max_weight_norm(self) -> float:
        return float(np.max(self.weight_norms))

    @property
    def max_weight_inf_norm(self) -> float:
        return float(np.max(self.weight_inf_norms))

    @property
    def weight_snapshots(self) -> list[tuple[int, np.ndarray]]:
        return [(int(step), weights) for step, weights in zip(self.snapshot_steps, self.snapshot_weights)]

    @property
    def state_indices(self) -> np.ndarray:
        return self.space.indices_of(self.samples)

    def state(self, step: int) -> State:
        """Sample of 1-based ``step``."""
        return self.space.state(self.samples[step - 1])

    def recompute_feature_sum(self, fmap: FeatureMap) -> np.ndarray:
        """Sum of ``phi(s_t)`` over the samples, accumulated left to right."""
        total = np.zeros(fmap.dim)
        for row in fmap.evaluate_many(self.samples):
            total += row
        return total

    def identity_residual(self, moments: MomentVector) -> float:
        """Max-abs gap of ``w_T = w_0 + T phi_bar - sum phi(s_t)`` (unit learning rate)."""
        expected = self.initial_weights + self.steps * moments.values - self.running_feature_sum
        return float(np.max(np.abs(self.final_weights - expected)))

    def weights_at_stride_one(self) -> np.ndarray:
        """All weights w_0..w_T; requires ``snapshot_stride == 1``."""
        if len(self.snapshot_steps) != self.steps + 1:
            raise ValueError("Trace was not recorded with snapshot_stride=1")
        return self.snapshot_weights


class TraceRecorder:
    """Accumulates a trace step by step."""

    log = logging.getLogger(__name__)

    def __init__(self, space: StateSpace, initial_weights: np.ndarray, config: TraceConfig, steps: int) -> None:
        self.space = space
        self.config = config
        self._steps = steps
        self._samples = np.zeros((steps, space.n_variables), dtype=np.int64)
        self._count = 0
        self.feature_sum = np.zeros(len(initial_weights))
        self.initial_weights = np.array(initial_weights, dtype=np.float64)
        self._snapshot_steps: list[int] = [0]
        self._snapshot_weights: list[np.ndarray] = [self.initial_weights.copy()]
        self._norms = np.zeros(steps + 1)
        self._inf_norms = np.zeros(steps + 1)
        self._norms[0] = np.linalg.norm(self.initial_weights)
        self._inf_norms[0] = np.max(np.abs(self.initial_weights))
        self.pct_violations: list[int] = []
        self._last_weights = self.initial_weights

    def record(self, state: State, features: np.ndarray, weights: np.ndarray, pct_violated: bool = False) -> None:
        step = self._count + 1
        self._samples[self._count] = state.assignment
        self._count = step
        self.feature_sum += features
        self._norms[step] = np.linalg.norm(weights)
        self._inf_norms[step] = np.max(np.abs(weights))
        self._last_weights = weights
        if step % self.config.snapshot_stride == 0:
            self._snapshot_steps.append(step)
            self._snapshot_weights.append(weights.copy())
        if pct_violated:
            self.pct_violations.append(step)

    def finish(self, metadata: dict[str, object] | None = None) -> HerdingTrace:
        count = self._count
        if self._snapshot_steps[-1] != count:
            self._snapshot_steps.append(count)
            self._snapshot_weights.append(self._last_weights.copy())
        return HerdingTrace(
            space=self.space,
            samples=self._samples[:count],
            running_feature_sum=self.feature_sum.copy(),
            snapshot_steps=np.asarray(self._snapshot_steps, dtype=np.int64),
            snapshot_weights=np.vstack(self._snapshot_weights),
            pct_violations=list(self.pct_violations),
            weight_norms=self._norms[: count + 1].copy(),
            weight_inf_norms=self._inf_norms[: count + 1].copy(),
            initial_weights=self.initial_weights.copy(),
            final_weights=np.array(self._last_weights, dtype=np.float64),
            metadata=dict(metadata or {}),
        )
