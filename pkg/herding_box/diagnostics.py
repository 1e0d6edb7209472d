"""Trace diagnostics: moment error, autocorrelation, complexity, PCT and boundedness monitors,
attractor recording and the lattice geometry of herding with few states.

All functions are pure over their inputs; running a diagnostic twice on the same trace gives
identical output.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.linalg import lu_factor, lu_solve, orth
from scipy.spatial.distance import pdist

from .engine import PCT_TOLERANCE, pct_violated
from .exceptions import DimensionMismatchError, NonEnumerableError, SingularBasisError
from .feature_map import FeatureMap
from .moments import MomentVector
from .temperature import PERIOD_TOLERANCE
from .trace import HerdingTrace

log = logging.getLogger(__name__)

DEFAULT_ERROR_POINTS = 40
# Clustering tolerance of attractor points, same as period detection.
CLUSTER_TOLERANCE = PERIOD_TOLERANCE


@dataclass(frozen=True, eq=False)
class MomentErrorCurve:
    """Moment error at prefixes ``steps``.

    ``l2`` is ``||phi_bar - (1/T) sum phi(s_t)||_2``, ``max_abs`` its max-abs counterpart and
    ``bound`` the matching-rate bound ``2 max_{t<=T} ||w_t||_inf / T``.
    """

    steps: np.ndarray
    l2: np.ndarray
    max_abs: np.ndarray
    bound: np.ndarray

    def within_bound(self, slack: float = 1e-12) -> bool:
        return bool(np.all(self.max_abs <= self.bound + slack))

    def slope(self, start: int, stop: int) -> float:
        """Log-log slope of ``l2`` over prefixes in [start, stop]."""
        mask = (self.steps >= start) & (self.steps <= stop) & (self.l2 > 0.0)
        if np.count_nonzero(mask) < 2:
            raise ValueError(f"Fewer than two nonzero error points in [{start}, {stop}]")
        return float(np.polyfit(np.log(self.steps[mask]), np.log(self.l2[mask]), 1)[0])


def log_spaced_steps(total: int, points: int = DEFAULT_ERROR_POINTS) -> np.ndarray:
    """Distinct integer prefixes 1..total spaced evenly in log scale; always contains ``total``."""
    steps = np.unique(np.round(np.logspace(0.0, math.log10(total), points)).astype(np.int64))
    steps = steps[(steps >= 1) & (steps <= total)]
    if steps[-1] != total:
        steps = np.append(steps, total)
    return steps


def moment_error(
    trace: HerdingTrace, moments: MomentVector, fmap: FeatureMap, points: int = DEFAULT_ERROR_POINTS
) -> MomentErrorCurve:
    if trace.steps < 1:
        raise ValueError("Moment error needs a non-empty trace")
    moments.check_dimension(fmap)
    running = np.cumsum(fmap.evaluate_many(trace.samples), axis=0)
    steps = log_spaced_steps(trace.steps, points)
    means = running[steps - 1] / steps[:, np.newaxis]
    gaps = moments.values[np.newaxis, :] - means
    prefix_max = np.maximum.accumulate(trace.weight_inf_norms)
    return MomentErrorCurve(
        steps=steps,
        l2=np.linalg.norm(gaps, axis=1),
        max_abs=np.max(np.abs(gaps), axis=1),
        bound=2.0 * prefix_max[steps] / steps,
    )


def snapshot_moment_error(trace: HerdingTrace) -> tuple[np.ndarray, np.ndarray]:
    """``||(w_T - w_0) / T||_2`` at every nonzero snapshot step."""
    mask = trace.snapshot_steps > 0
    steps = trace.snapshot_steps[mask]
    deltas = trace.snapshot_weights[mask] - trace.initial_weights[np.newaxis, :]
    return steps, np.linalg.norm(deltas / steps[:, np.newaxis], axis=1)


def autocorrelation(states: np.ndarray, t_max: int) -> list[float | None]:
    """``R(t)`` for t = 0..t_max with the empirical distribution of the same sequence.

    ``R(t) = (mean_tau [s_tau == s_{tau+t}] - sum_x P(x)^2) / (1 - sum_x P(x)^2)``. For a constant
    sequence the denominator vanishes and every entry is None.
    """
    states = np.asarray(states).reshape(-1)
    if not 0 <= t_max < len(states):
        raise ValueError(f"t_max must lie in 0..{len(states) - 1}, got {t_max}")
    _, counts = np.unique(states, return_counts=True)
    collision = float(np.sum((counts / len(states)) ** 2))
    denominator = 1.0 - collision
    if denominator <= 0.0:
        log.debug("Constant sequence, autocorrelation undefined")
        return [None] * (t_max + 1)
    values: list[float | None] = [1.0]
    for lag in range(1, t_max + 1):
        agree = float(np.mean(states[lag:] == states[:-lag]))
        values.append((agree - collision) / denominator)
    return values


def subsequence_complexity(sequence: np.ndarray, l_max: int) -> np.ndarray:
    """Number of distinct length-L windows, ``M(L)`` for L = 1..l_max."""
    sequence = np.ascontiguousarray(np.asarray(sequence).reshape(-1))
    if not 1 <= l_max <= len(sequence):
        raise ValueError(f"l_max must lie in 1..{len(sequence)}, got {l_max}")
    counts = np.empty(l_max, dtype=np.int64)
    for length in range(1, l_max + 1):
        windows = np.ascontiguousarray(np.lib.stride_tricks.sliding_window_view(sequence, length))
        keys = windows.view(np.dtype((np.void, windows.dtype.itemsize * length))).reshape(-1)
        counts[length - 1] = len(np.unique(keys))
    return counts


def fit_growth_exponent(counts: np.ndarray, start: int = 1) -> float:
    """Slope of ``log M(L)`` against ``log L`` for L >= start."""
    lengths = np.arange(1, len(counts) + 1)
    mask = lengths >= start
    return float(np.polyfit(np.log(lengths[mask]), np.log(counts[mask]), 1)[0])


class PctMonitor:
    """Counts steps whose update vector violates ``w^T v <= 0`` beyond the scaled tolerance."""

    log = logging.getLogger(__name__)

    def __init__(self, tolerance: float = PCT_TOLERANCE) -> None:
        self.tolerance = tolerance
        self.checked = 0
        self.violations: list[int] = []

    def check(self, weights: np.ndarray, update: np.ndarray) -> bool:
        """Returns True when the step is ok."""
        self.checked += 1
        if pct_violated(weights, update, self.tolerance):
            self.log.warning("PCT violation at check %d", self.checked)
            self.violations.append(self.checked)
            return False
        return True

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> dict[str, int]:
        return {"checked": self.checked, "violations": len(self.violations)}


@dataclass(frozen=True)
class Boundedness:
    initial_norm: float
    max_norm: float
    first_half_max: float
    second_half_max: float

    @property
    def empirical_radius(self) -> float:
        """``M_emp`` with ``max ||w_t|| <= ||w_0|| + M_emp``."""
        return self.max_norm - self.initial_norm

    def second_half_within(self, slack: float = 1e-9) -> bool:
        return self.second_half_max <= self.first_half_max + slack


def boundedness(weight_norms: np.ndarray) -> Boundedness:
    """Summary of a norm curve ``||w_t||`` for t = 0..T."""
    norms = np.asarray(weight_norms, dtype=np.float64)
    if len(norms) < 2:
        raise ValueError("Boundedness needs at least two norms")
    half = len(norms) // 2
    return Boundedness(
        initial_norm=float(norms[0]),
        max_norm=float(np.max(norms)),
        first_half_max=float(np.max(norms[:half])),
        second_half_max=float(np.max(norms[half:])),
    )


def _lattice_basis(fmap: FeatureMap) -> tuple[np.ndarray, np.ndarray]:
    if not fmap.enumerable:
        raise NonEnumerableError("Lattice geometry needs an enumerable state space")
    table = fmap.feature_table
    return table, (table[1:] - table[0]).T


def _torus_factorization(fmap: FeatureMap) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
    table, basis = _lattice_basis(fmap)
    if basis.shape[0] != basis.shape[1]:
        raise DimensionMismatchError(f"Torus coordinates need D = K + 1, got D={len(table)}, K={fmap.dim}")
    if np.linalg.matrix_rank(basis) < basis.shape[1]:
        log.error("Feature differences are linearly dependent")
        raise SingularBasisError("Feature differences phi(x_d) - phi(x_0) are linearly dependent")
    return table, lu_factor(basis)


def torus_coordinates(weights: np.ndarray, fmap: FeatureMap) -> np.ndarray:
    """Coordinates of ``w_t - w_0`` in the basis ``phi(x_d) - phi(x_0)``, d = 1..D-1.

    Requires D = K + 1 states with linearly independent differences.
    """
    _, factorization = _torus_factorization(fmap)
    weights = np.asarray(weights, dtype=np.float64)
    return lu_solve(factorization, (weights - weights[0]).T).T


def torus_rotation_check(weights: np.ndarray, moments: MomentVector, fmap: FeatureMap) -> float:
    """Max per-step deviation of the torus image from a rigid rotation.

    Each step adds the basis image of ``phi_bar - phi(x_0)`` minus an integer unit vector, so
    the per-step increment reduced mod 1 is constant.
    """
    table, factorization = _torus_factorization(fmap)
    weights = np.asarray(weights, dtype=np.float64)
    coordinates = lu_solve(factorization, (weights - weights[0]).T).T
    rotation = lu_solve(factorization, moments.values - table[0])
    increments = np.diff(coordinates, axis=0) - rotation[np.newaxis, :]
    if len(increments) == 0:
        return 0.0
    return float(np.max(np.abs(increments - np.round(increments))))


def rotation_vector(moments: MomentVector, fmap: FeatureMap) -> np.ndarray:
    """Basis image of ``phi_bar - phi(x_0)`` reduced mod 1."""
    table, factorization = _torus_factorization(fmap)
    rotation = lu_solve(factorization, moments.values - table[0])
    return rotation - np.floor(rotation)


def torus_period(coordinates: np.ndarray, tolerance: float = 1e-9) -> int | None:
    """Smallest p with the torus point at step p equal to step 0 (mod 1), or None."""
    for step in range(1, len(coordinates)):
        delta = coordinates[step] - coordinates[0]
        if float(np.max(np.abs(delta - np.round(delta)))) < tolerance:
            return step
    return None


def subspace_check(weights: np.ndarray, fmap: FeatureMap) -> float:
    """Max distance of ``w_t - w_0`` from the span of ``phi(x_d) - phi(x_0)``."""
    _, basis = _lattice_basis(fmap)
    weights = np.asarray(weights, dtype=np.float64)
    deltas = weights - weights[0]
    if not np.any(basis):
        return float(np.max(np.linalg.norm(deltas, axis=1)))
    q = orth(basis)
    residual = deltas - (deltas @ q) @ q.T
    return float(np.max(np.linalg.norm(residual, axis=1)))


def cluster_points(points: np.ndarray, tolerance: float = CLUSTER_TOLERANCE) -> np.ndarray:
    """Distinct representatives of ``points`` under max-abs distance ``tolerance``, in first-seen order."""
    representatives: list[np.ndarray] = []
    for point in np.asarray(points, dtype=np.float64):
        if not any(float(np.max(np.abs(point - r))) < tolerance for r in representatives):
            representatives.append(point)
    if not representatives:
        return np.empty((0, np.asarray(points).shape[-1]))
    return np.vstack(representatives)


@dataclass(frozen=True, eq=False)
class AttractorRecord:
    points: np.ndarray
    burn_in: int

    def distinct(self, tolerance: float = CLUSTER_TOLERANCE) -> np.ndarray:
        return cluster_points(self.points, tolerance)

    @property
    def diameter(self) -> float:
        if len(self.points) < 2:
            return 0.0
        return float(np.max(pdist(self.points)))


def attractor_record(weights: np.ndarray, burn_in: int) -> AttractorRecord:
    """Weight points after ``burn_in`` of a stride-one weight sequence."""
    weights = np.asarray(weights, dtype=np.float64)
    if not 0 <= burn_in < len(weights):
        raise ValueError(f"burn_in must lie in 0..{len(weights) - 1}, got {burn_in}")
    return AttractorRecord(weights[burn_in:].copy(), burn_in)


@dataclass(eq=False)
class DiagReport:
    """Serializable bundle of trace diagnostics."""

    moment_error_curve: MomentErrorCurve | None
    autocorr: list[float | None]
    complexity_curve: np.ndarray
    pct_summary: dict[str, int]
    weight_norm_curve: np.ndarray = field(repr=False)
    period: int | None = None
    growth_exponent: float | None = None
    boundedness: Boundedness | None = None

    def to_dict(self) -> dict[str, Any]:
        curve = self.moment_error_curve
        return {
            "moment_error": (
                None
                if curve is None
                else {
                    "T": curve.steps.tolist(),
                    "l2": curve.l2.tolist(),
                    "max_abs": curve.max_abs.tolist(),
                    "bound": curve.bound.tolist(),
                }
            ),
            "R": self.autocorr,
            "complexity": {
                "L": list(range(1, len(self.complexity_curve) + 1)),
                "M": self.complexity_curve.tolist(),
            },
            "growth_exponent": self.growth_exponent,
            "pct": self.pct_summary,
            "weight_norm": self.weight_norm_curve.tolist(),
            "boundedness": None if self.boundedness is None else vars(self.boundedness),
            "period": "aperiodic at horizon" if self.period is None else self.period,
        }


def diagnose(
    trace: HerdingTrace,
    moments: MomentVector | None = None,
    fmap: FeatureMap | None = None,
    *,
    t_max: int = 20,
    l_max: int = 20,
    norm_stride: int = 1,
) -> DiagReport:
    """Run every trace diagnostic that the available inputs allow."""
    states = trace.state_indices if trace.space.enumerable else joint_state_ids(trace.samples)
    t_max = min(t_max, max(trace.steps - 1, 0))
    l_max = min(l_max, trace.steps)
    curve = moment_error(trace, moments, fmap) if moments is not None and fmap is not None else None
    complexity = subsequence_complexity(states, l_max) if l_max >= 1 else np.empty(0, dtype=np.int64)
    exponent = fit_growth_exponent(complexity) if len(complexity) >= 2 else None
    period = _state_period(states)
    checked = trace.steps if trace.metadata.get("pct_verified") else 0
    log.info("Diagnosed trace of %d steps (period %s)", trace.steps, period)
    return DiagReport(
        moment_error_curve=curve,
        autocorr=autocorrelation(states, t_max) if trace.steps >= 1 else [],
        complexity_curve=complexity,
        pct_summary={"checked": checked, "violations": len(trace.pct_violations)},
        weight_norm_curve=trace.weight_norms[::norm_stride].copy(),
        period=period,
        growth_exponent=exponent,
        boundedness=boundedness(trace.weight_norms) if len(trace.weight_norms) >= 2 else None,
    )


def joint_state_ids(samples: np.ndarray) -> np.ndarray:
    """One integer id per distinct row of ``samples``, for spaces too large to index."""
    samples = np.asarray(samples)
    if len(samples) == 0:
        return np.zeros(0, dtype=np.int64)
    _, inverse = np.unique(samples, axis=0, return_inverse=True)
    return inverse.reshape(-1).astype(np.int64)


def _state_period(states: np.ndarray, max_period: int = 1024) -> int | None:
    """Period of the second half of a state sequence, or None."""
    tail = np.asarray(states)[len(states) // 2 :]
    for period in range(1, min(max_period, len(tail) // 2) + 1):
        if np.array_equal(tail[period:], tail[:-period]):
            return period
    return None
