"""Finite-temperature gradient map and its period-doubling route to herding.

At temperature T the map is ``w' = w + phi_bar - E_{P(x; w/T)}[phi(x)]``; as T -> 0 the
expectation collapses onto the argmax state and the map becomes the herding update.
"""

from __future__ import annotations

import logging
from concurrent import futures
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .engine import WeightVector, check_finite
from .exceptions import HerdingError, NonEnumerableError
from .feature_map import FeatureMap
from .moments import MomentVector

log = logging.getLogger(__name__)

# Period detection constants.
PERIOD_TOLERANCE = 1e-8
PERIOD_CONSECUTIVE = 100
MAX_PERIOD = 1024


def expected_features_at_temperature(weights: WeightVector, fmap: FeatureMap, temperature: float) -> np.ndarray:
    """``E_{P(x; w/T)}[phi(x)]`` by exact enumeration with log-sum-exp stabilization."""
    if not fmap.enumerable:
        raise NonEnumerableError("Expected features need an enumerable state space")
    if not temperature > 0.0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    table = fmap.feature_table
    logits = (table @ np.asarray(weights, dtype=np.float64)) / temperature
    log_probs = logits - logsumexp(logits)
    probs = np.exp(log_probs)
    if not np.all(np.isfinite(probs)):
        raise HerdingError(f"Softmax overflow at temperature {temperature!r}")
    return probs @ table


def temperature_map_step(
    weights: WeightVector, moments: MomentVector, fmap: FeatureMap, temperature: float
) -> WeightVector:
    """One step of the finite-temperature map with unit learning rate."""
    new_weights = weights + moments.values - expected_features_at_temperature(weights, fmap, temperature)
    check_finite(new_weights)
    return new_weights


def temperature_orbit(
    initial_weights: WeightVector, moments: MomentVector, fmap: FeatureMap, temperature: float, steps: int
) -> np.ndarray:
    """Weights w_0..w_steps of the temperature map, shape (steps + 1, K)."""
    orbit = np.empty((steps + 1, fmap.dim))
    orbit[0] = initial_weights
    weights = np.asarray(initial_weights, dtype=np.float64)
    for step in range(1, steps + 1):
        weights = temperature_map_step(weights, moments, fmap, temperature)
        orbit[step] = weights
    return orbit


def detect_period(
    orbit: np.ndarray,
    *,
    tolerance: float = PERIOD_TOLERANCE,
    consecutive: int = PERIOD_CONSECUTIVE,
    max_period: int = MAX_PERIOD,
) -> int | None:
    """Smallest p <= max_period with ``||w_{t+p} - w_t||_inf < tolerance`` for ``consecutive`` t.

    ``orbit`` must already exclude burn-in; uses its first ``consecutive + max_period`` rows.
    Returns None when no period is found ("aperiodic at horizon").
    """
    needed = consecutive + max_period
    if len(orbit) < needed:
        raise ValueError(f"Orbit of length {len(orbit)} is too short, need {needed}")
    base = orbit[:consecutive]
    for period in range(1, max_period + 1):
        shifted = orbit[period : period + consecutive]
        if float(np.max(np.abs(shifted - base))) < tolerance:
            return period
    return None


@dataclass(frozen=True)
class BifurcationPoint:
    temperature: float
    period: int | None
    attractor: np.ndarray = field(repr=False, compare=False)


def bifurcation_point(
    moments: MomentVector,
    fmap: FeatureMap,
    temperature: float,
    *,
    initial_weights: WeightVector | None = None,
    burn_in: int = 5000,
    max_period: int = MAX_PERIOD,
    consecutive: int = PERIOD_CONSECUTIVE,
) -> BifurcationPoint:
    """Run one chain at ``temperature`` and report its asymptotic period."""
    start = moments.values.copy() if initial_weights is None else np.asarray(initial_weights, dtype=np.float64)
    orbit = temperature_orbit(start, moments, fmap, temperature, burn_in + consecutive + max_period)
    window = orbit[burn_in + 1 :]
    period = detect_period(window, consecutive=consecutive, max_period=max_period)
    log.debug("Temperature %.6g: period %s", temperature, period)
    return BifurcationPoint(float(temperature), period, window)


def bifurcation_scan(
    moments: MomentVector,
    fmap: FeatureMap,
    temperatures: np.ndarray,
    *,
    burn_in: int = 5000,
    max_period: int = MAX_PERIOD,
    consecutive: int = PERIOD_CONSECUTIVE,
    max_workers: int = 1,
) -> list[BifurcationPoint]:
    """Asymptotic period for each temperature, in the order given.

    Chains are independent; with ``max_workers > 1`` they run in a thread pool and results are
    returned in input order.
    """
    log.info("Bifurcation scan over %d temperatures (burn-in %d)", len(temperatures), burn_in)

    def run(temperature: float) -> BifurcationPoint:
        return bifurcation_point(
            moments, fmap, float(temperature), burn_in=burn_in, max_period=max_period, consecutive=consecutive
        )

    if max_workers <= 1:
        return [run(t) for t in temperatures]
    with futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(run, temperatures))


def period_sequence(points: list[BifurcationPoint]) -> list[int | None]:
    """Distinct consecutive periods along a scan, e.g. [1, 2, 4, None]."""
    sequence: list[int | None] = []
    for point in points:
        if not sequence or sequence[-1] != point.period:
            sequence.append(point.period)
    return sequence
