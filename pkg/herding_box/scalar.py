"""Closed-form fast paths: the single binary neuron, 1-of-D herding and the Rabbit sequence."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SILVER = math.sqrt(2.0) - 1.0
# Tolerance of the probability vector sum.
PROBABILITY_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class NeuronConfig:
    """Target firing rate ``pi`` and initial weight ``w0`` of one herding neuron."""

    pi: float
    w0: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.pi <= 1.0:
            raise ConfigError(f"pi must lie in [0, 1], got {self.pi}")
        if not math.isfinite(self.w0):
            raise ConfigError(f"w0 must be finite, got {self.w0}")

    @classmethod
    def rabbit(cls) -> NeuronConfig:
        """Golden-mean rate started at ``2*pi - 1``; its bits are the Rabbit sequence."""
        return cls(GOLDEN, 2.0 * GOLDEN - 1.0)

    @classmethod
    def half_bound(cls, pi: float) -> NeuronConfig:
        """Start at ``pi - 1/2`` where window counts stay within 1/2 of their target."""
        return cls(pi, pi - 0.5)

    @property
    def in_invariant_interval(self) -> bool:
        return self.pi - 1.0 < self.w0 <= self.pi


@dataclass(frozen=True)
class MultinomialConfig:
    """Probability vector ``pi`` over D states and initial weights ``w0`` (default ``pi``)."""

    pi: np.ndarray
    w0: np.ndarray | None = None

    def __post_init__(self) -> None:
        pi = np.array(self.pi, dtype=np.float64).reshape(-1)
        if len(pi) == 0:
            raise ConfigError("pi must have at least one entry")
        if np.any(pi < 0.0) or abs(float(np.sum(pi)) - 1.0) > PROBABILITY_SUM_TOLERANCE:
            raise ConfigError(f"pi must be nonnegative and sum to 1, got {pi.tolist()}")
        w0 = pi.copy() if self.w0 is None else np.array(self.w0, dtype=np.float64).reshape(-1)
        if w0.shape != pi.shape:
            raise ConfigError(f"w0 has {len(w0)} entries, pi has {len(pi)}")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "w0", w0)

    @property
    def size(self) -> int:
        return len(self.pi)


@dataclass(frozen=True, eq=False)
class NeuronRun:
    bits: np.ndarray
    weights: np.ndarray = field(repr=False)

    @property
    def final_weight(self) -> float:
        return float(self.weights[-1])


@dataclass(frozen=True, eq=False)
class MultinomialRun:
    states: np.ndarray
    final_weights: np.ndarray
    weight_inf_norms: np.ndarray = field(repr=False)

    def counts(self, size: int) -> np.ndarray:
        return np.bincount(self.states, minlength=size)


def neuron_run(config: NeuronConfig, steps: int) -> NeuronRun:
    """Herd one binary neuron: ``s_t = [w_{t-1} > 0]``, ``w_t = w_{t-1} + pi - s_t``.

    The comparison is strict, so ``w = 0`` does not fire. ``weights`` holds w_0..w_T.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    bits = np.empty(steps, dtype=np.int8)
    weights = np.empty(steps + 1, dtype=np.float64)
    w = float(config.w0)
    pi = float(config.pi)
    weights[0] = w
    for t in range(steps):
        s = 1 if w > 0.0 else 0
        w = w + pi - s
        bits[t] = s
        weights[t + 1] = w
    log.debug("Neuron run pi=%.17g w0=%.17g T=%d: %d ones", pi, config.w0, steps, int(np.sum(bits)))
    return NeuronRun(bits, weights)


def neuron_discrepancy(bits: np.ndarray, pi: float, window_start: int, window_len: int) -> float:
    """``|#ones in bits[window_start:window_start+window_len] - window_len*pi|``."""
    if window_start < 0 or window_len < 0 or window_start + window_len > len(bits):
        raise ValueError(f"Window [{window_start}, {window_start + window_len}) outside sequence of {len(bits)}")
    ones = int(np.sum(bits[window_start : window_start + window_len]))
    return abs(ones - window_len * pi)


def max_window_discrepancy(bits: np.ndarray, pi: float, window_len: int) -> float:
    """Largest ``neuron_discrepancy`` over all windows of length ``window_len``."""
    if not 1 <= window_len <= len(bits):
        raise ValueError(f"window_len must lie in 1..{len(bits)}, got {window_len}")
    cumulative = np.concatenate([[0], np.cumsum(bits, dtype=np.int64)])
    ones = cumulative[window_len:] - cumulative[:-window_len]
    return float(np.max(np.abs(ones - window_len * pi)))


def rabbit_sequence(n: int) -> np.ndarray:
    """First ``n`` symbols of the fixed point of ``1 -> 10, 0 -> 1`` started from ``1``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    previous, current = [1], [1, 0]
    while len(current) < n:
        # the next Fibonacci word is the concatenation of the last two
        previous, current = current, current + previous
    return np.asarray(current[:n], dtype=np.int8)


def multinomial_run(config: MultinomialConfig, steps: int) -> MultinomialRun:
    """Herding of one D-valued variable in 1-of-D encoding.

    ``s_t = argmax_x w_{t-1,x}`` (lowest index on ties), ``w_t = w_{t-1} + pi - e_{s_t}``.
    The state sequence is bit-identical to ``herd_run`` with ``TableFeatureMap.one_of_d``.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    w = np.array(config.w0, dtype=np.float64)
    pi = config.pi
    states = np.empty(steps, dtype=np.int64)
    inf_norms = np.empty(steps + 1)
    inf_norms[0] = np.max(np.abs(w))
    for t in range(steps):
        s = int(np.argmax(w))
        w = w + pi
        w[s] -= 1.0
        states[t] = s
        inf_norms[t + 1] = np.max(np.abs(w))
    log.debug("Multinomial run D=%d T=%d", config.size, steps)
    return MultinomialRun(states, w, inf_norms)
