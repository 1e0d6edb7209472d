"""The herding update engine.

One chain is strictly sequential. Feature sums are accumulated left to right in step order and
no reduction inside a chain is parallelized, so identical inputs give bit-identical traces.
"""

from __future__ import annotations

import logging
from typing import TypeAlias

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    HerdingError,
    NonEnumerableError,
    NonFiniteWeightError,
    PctViolationError,
)
from .feature_map import FeatureMap
from .maximizer import ExactEnumerationMaximizer, Maximizer
from .moments import MomentVector
from .state_space import State
from .trace import HerdingTrace, TraceConfig, TraceRecorder

log = logging.getLogger(__name__)

WeightVector: TypeAlias = np.ndarray
LearningRate: TypeAlias = float | np.ndarray | None

# Relative tolerance of the PCT inequality: violated iff w^T v > PCT_TOLERANCE * ||w|| * ||v||.
PCT_TOLERANCE = 1e-12
# Absolute tolerance per step of the moment identity w_T = w_0 + T phi_bar - sum phi(s_t).
IDENTITY_TOLERANCE = 1e-9


def pct_violated(weights: np.ndarray, update: np.ndarray, tolerance: float = PCT_TOLERANCE) -> bool:
    """True iff ``w^T v`` exceeds the scaled tolerance."""
    inner = float(np.dot(weights, update))
    return inner > tolerance * float(np.linalg.norm(weights)) * float(np.linalg.norm(update))


def check_finite(weights: np.ndarray, step: int | None = None) -> None:
    if not np.all(np.isfinite(weights)):
        log.error("Non-finite weights at step %s: %s", step, weights)
        raise NonFiniteWeightError(f"Non-finite weights at step {step}")


def apply_update(
    weights: np.ndarray, positive: np.ndarray, negative: np.ndarray, learning_rate: LearningRate = None
) -> np.ndarray:
    """``w + eta*positive - eta*negative``, evaluated left to right."""
    if learning_rate is None:
        return weights + positive - negative
    return weights + learning_rate * positive - learning_rate * negative


def _check_inputs(weights: np.ndarray, moments: MomentVector, fmap: FeatureMap) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (fmap.dim,):
        raise DimensionMismatchError(f"Weights have shape {weights.shape}, expected ({fmap.dim},)")
    moments.check_dimension(fmap)
    return weights


def herd_step(
    weights: WeightVector,
    moments: MomentVector,
    fmap: FeatureMap,
    maximizer: Maximizer,
    *,
    verify: bool | None = None,
    learning_rate: LearningRate = None,
) -> tuple[State, WeightVector]:
    """One herding update: ``s = argmax_x w^T phi(x)``, ``w' = w + phi_bar - phi(s)``.

    Raises:
        PctViolationError: if verification is on and ``w^T phi(s) < w^T phi_bar``
        NonFiniteWeightError: if the new weights contain NaN or Inf
    """
    weights = _check_inputs(weights, moments, fmap)
    state = maximizer.maximize(weights, fmap)
    features = fmap(state)
    if verify if verify is not None else not maximizer.exact:
        update = moments.values - features
        if pct_violated(weights, update):
            inner = float(np.dot(weights, update))
            log.error("PCT violation: w^T v = %.17g for state %s", inner, state.assignment)
            raise PctViolationError(f"PCT violation: w^T v = {inner!r}", inner_product=inner)
    new_weights = apply_update(weights, moments.values, features, learning_rate)
    check_finite(new_weights)
    return state, new_weights


def herd_run(
    initial_weights: WeightVector | None,
    moments: MomentVector,
    fmap: FeatureMap,
    maximizer: Maximizer,
    steps: int,
    trace_config: TraceConfig | None = None,
    *,
    learning_rate: LearningRate = None,
) -> HerdingTrace:
    """Run ``steps`` herding updates and record the trace.

    ``initial_weights=None`` starts from ``w_0 = phi_bar``.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    config = trace_config if trace_config is not None else TraceConfig()
    moments = moments.validated_for(fmap)
    weights = _check_inputs(
        moments.values.copy() if initial_weights is None else initial_weights, moments, fmap
    ).copy()
    verify = config.verification_enabled(maximizer.exact)
    log.info(
        "Herding %d steps with %r (K=%d, verify=%s, strict=%s)", steps, maximizer, fmap.dim, verify, config.strict_pct
    )

    recorder = TraceRecorder(fmap.space, weights, config, steps)
    phi_bar = moments.values
    fast = isinstance(maximizer, ExactEnumerationMaximizer) and fmap.enumerable
    table = fmap.feature_table if fast else None
    assignments = fmap.space.assignments if fast else None

    for step in range(1, steps + 1):
        if table is not None and assignments is not None:
            index = int(np.argmax(table @ weights))
            state = State(tuple(int(v) for v in assignments[index]), index)
            features = table[index]
        else:
            state = maximizer.maximize(weights, fmap)
            features = fmap(state)
        violated = False
        if verify:
            violated = pct_violated(weights, phi_bar - features)
            if violated:
                inner = float(np.dot(weights, phi_bar - features))
                if config.strict_pct:
                    log.error("PCT violation at step %d: w^T v = %.17g", step, inner)
                    raise PctViolationError(f"PCT violation at step {step}", step=step, inner_product=inner)
                log.warning("PCT violation at step %d: w^T v = %.17g", step, inner)
        weights = apply_update(weights, phi_bar, features, learning_rate)
        check_finite(weights, step)
        recorder.record(state, features, weights, violated)

    trace = recorder.finish(
        {"maximizer": maximizer.kind, "learning_rate": learning_rate is not None, "pct_verified": bool(verify)}
    )
    if learning_rate is None:
        residual = trace.identity_residual(moments)
        if residual > IDENTITY_TOLERANCE * steps:
            log.error("Moment identity residual %.3g exceeds %.3g", residual, IDENTITY_TOLERANCE * steps)
            raise HerdingError(f"Moment identity residual {residual:.3g} exceeds tolerance")
    log.info(
        "Herding finished: %d PCT violations, max ||w|| = %.6g", len(trace.pct_violations), trace.max_weight_norm
    )
    return trace


def tipi_value(weights: WeightVector, moments: MomentVector, fmap: FeatureMap) -> float:
    """Zero-temperature log-likelihood ``w^T phi_bar - max_x w^T phi(x)``; always <= 0."""
    if not fmap.enumerable:
        raise NonEnumerableError("tipi_value needs an enumerable state space")
    weights = _check_inputs(weights, moments, fmap)
    return float(np.dot(weights, moments.values) - np.max(fmap.feature_table @ weights))


def greedy_dual_choice(feature_sum: np.ndarray, steps_done: int, moments: MomentVector, fmap: FeatureMap) -> int:
    """Index of the state minimizing ``||phi_bar - (S_T + phi(x)) / (T + 1)||``.

    With ``w_0 = phi_bar`` and constant-norm features this is the state herding picks next.
    """
    if not fmap.enumerable:
        raise NonEnumerableError("greedy_dual_choice needs an enumerable state space")
    means = (feature_sum[np.newaxis, :] + fmap.feature_table) / (steps_done + 1)
    errors = np.sum((moments.values[np.newaxis, :] - means) ** 2, axis=1)
    return int(np.argmin(errors))
