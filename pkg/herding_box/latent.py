"""Herding for partially observed MRFs.

Each step imputes the hidden variables of every data case by a clamped maximization, averages
the imputed features as the positive term and subtracts the features of a joint maximization.
"""

from __future__ import annotations

import logging
from concurrent import futures
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Sequence

import numpy as np
from scipy.stats import entropy

from .engine import apply_update, check_finite, pct_violated
from .exceptions import HerdingError, MonotonicityError, PctViolationError, StateSpaceError
from .feature_map import FeatureMap
from .maximizer import Maximizer
from .state_space import State
from .trace import HerdingTrace, TraceConfig, TraceRecorder

log = logging.getLogger(__name__)

# Allowed score decrease of a local maximizer relative to its initial state.
MONOTONICITY_TOLERANCE = 1e-12
IDENTITY_TOLERANCE = 1e-9


class Variant(StrEnum):
    FULL = "full"
    TRACTABLE = "tractable"


class PomrfProblem:
    """Visible data cases with persistent hidden imputations over a joint feature map.

    ``visible_variables`` are the fmap variables observed in the data (default: the first
    ``visible_data.shape[1]`` variables); the remaining variables are hidden.
    """

    log = logging.getLogger(__name__)

    def __init__(
        self,
        visible_data: np.ndarray,
        fmap: FeatureMap,
        visible_variables: Sequence[int] | None = None,
        imputations: np.ndarray | None = None,
    ) -> None:
        data = np.array(visible_data, dtype=np.int64)
        if data.ndim != 2 or len(data) == 0:
            raise StateSpaceError(f"Visible data must be a non-empty 2-D array, got shape {data.shape}")
        n_vars = fmap.space.n_variables
        visible = list(visible_variables) if visible_variables is not None else list(range(data.shape[1]))
        if len(visible) != data.shape[1]:
            raise StateSpaceError(f"Data has {data.shape[1]} columns for {len(visible)} visible variables")
        self.fmap = fmap
        self.visible_data = data
        self.visible_variables = visible
        self.hidden_variables = [v for v in range(n_vars) if v not in set(visible)]
        if imputations is None:
            imputations = np.zeros((len(data), len(self.hidden_variables)), dtype=np.int64)
        self.imputations = np.array(imputations, dtype=np.int64)
        for case in range(len(data)):
            fmap.space.validate(self.joint_assignment(case))

    @property
    def n_cases(self) -> int:
        return len(self.visible_data)

    @property
    def n_hidden(self) -> int:
        return len(self.hidden_variables)

    def joint_assignment(self, case: int, hidden: np.ndarray | None = None) -> np.ndarray:
        assignment = np.zeros(self.fmap.space.n_variables, dtype=np.int64)
        assignment[self.visible_variables] = self.visible_data[case]
        assignment[self.hidden_variables] = self.imputations[case] if hidden is None else hidden
        return assignment

    def clamp(self, case: int) -> dict[int, int]:
        return {v: int(x) for v, x in zip(self.visible_variables, self.visible_data[case])}

    def positive_average(self, cases: Sequence[int] | None = None) -> np.ndarray:
        """``(1/D) sum_i phi(x_i, z_i)`` over the current imputations, summed in case order."""
        cases = range(self.n_cases) if cases is None else cases
        total = np.zeros(self.fmap.dim)
        for case in cases:
            total += self.fmap.evaluate(self.joint_assignment(case))
        return total / len(cases)


@dataclass(frozen=True, eq=False)
class EnergyRecord:
    """``-w^T phi(x_i, z*_i)`` per case and the lowest-energy case (lowest index on ties)."""

    per_case_energy: np.ndarray
    argmin_case: int


def case_energies(problem: PomrfProblem, weights: np.ndarray, cases: Sequence[int] | None = None) -> EnergyRecord:
    cases = list(range(problem.n_cases)) if cases is None else list(cases)
    energies = np.array([-problem.fmap.score(weights, problem.joint_assignment(case)) for case in cases])
    return EnergyRecord(energies, cases[int(np.argmin(energies))])


@dataclass(frozen=True, eq=False)
class PomrfStepResult:
    imputations: np.ndarray
    joint_state: State
    weights: np.ndarray
    positive: np.ndarray
    negative: np.ndarray
    pct_violated: bool


def impute(
    problem: PomrfProblem,
    weights: np.ndarray,
    maximizer: Maximizer,
    cases: Sequence[int] | None = None,
    executor: futures.Executor | None = None,
) -> None:
    """Clamped maximization of every case's hidden variables, warm-started from its imputation.

    Each case runs on its own ``maximizer.fork()``, so cases may run concurrently on ``executor``
    and the shared maximizer keeps no state from imputation. Results are stored in case order.
    """
    cases = list(range(problem.n_cases)) if cases is None else list(cases)
    if not problem.hidden_variables:
        return

    def run(case: int) -> State:
        return maximizer.fork().maximize(
            weights, problem.fmap, init=problem.joint_assignment(case), clamp=problem.clamp(case)
        )

    states = list(executor.map(run, cases)) if executor is not None else [run(case) for case in cases]
    for case, state in zip(cases, states):
        problem.imputations[case] = np.asarray(state.assignment)[problem.hidden_variables]


def _finish_step(
    problem: PomrfProblem,
    weights: np.ndarray,
    positive: np.ndarray,
    state: State,
    verify: bool,
    strict_pct: bool,
) -> PomrfStepResult:
    negative = problem.fmap(state)
    violated = False
    if verify and pct_violated(weights, positive - negative):
        violated = True
        inner = float(np.dot(weights, positive - negative))
        if strict_pct:
            log.error("PCT violation in POMRF step: w^T v = %.17g", inner)
            raise PctViolationError(f"PCT violation: w^T v = {inner!r}", inner_product=inner)
        log.warning("PCT violation in POMRF step: w^T v = %.17g", inner)
    new_weights = apply_update(weights, positive, negative)
    check_finite(new_weights)
    return PomrfStepResult(problem.imputations.copy(), state, new_weights, positive, negative, violated)


def pomrf_step(
    problem: PomrfProblem,
    weights: np.ndarray,
    maximizer: Maximizer,
    joint_maximizer: Maximizer | None = None,
    *,
    cases: Sequence[int] | None = None,
    previous: State | None = None,
    verify: bool | None = None,
    strict_pct: bool = False,
    executor: futures.Executor | None = None,
) -> PomrfStepResult:
    """Full POMRF update: impute, then maximize jointly (warm-started from ``previous``).

    ``w' = w + (1/D) sum_i phi(x_i, z*_i) - phi(s*)``.
    """
    joint = joint_maximizer if joint_maximizer is not None else maximizer
    weights = np.asarray(weights, dtype=np.float64)
    impute(problem, weights, maximizer, cases, executor)
    positive = problem.positive_average(cases)
    init = previous.assignment if previous is not None else None
    state = joint.maximize(weights, problem.fmap, init=init)
    check = (not joint.exact or not maximizer.exact) if verify is None else verify
    return _finish_step(problem, weights, positive, state, check, strict_pct)


def tractable_pomrf_step(
    problem: PomrfProblem,
    weights: np.ndarray,
    maximizer: Maximizer,
    local_maximizer: Maximizer,
    *,
    cases: Sequence[int] | None = None,
    verify: bool = True,
    strict_pct: bool = False,
    executor: futures.Executor | None = None,
) -> PomrfStepResult:
    """POMRF update whose joint search starts at the lowest-energy imputed data case.

    Raises:
        MonotonicityError: if ``local_maximizer`` returns a state scoring below its start
    """
    weights = np.asarray(weights, dtype=np.float64)
    impute(problem, weights, maximizer, cases, executor)
    positive = problem.positive_average(cases)
    record = case_energies(problem, weights, cases)
    start = problem.joint_assignment(record.argmin_case)
    state = local_maximizer.maximize(weights, problem.fmap, init=start)
    start_score = -float(record.per_case_energy.min())
    score = problem.fmap.score(weights, state.assignment)
    if score < start_score - MONOTONICITY_TOLERANCE * max(1.0, abs(start_score)):
        log.error("Local maximizer lowered the score from %.17g to %.17g", start_score, score)
        raise MonotonicityError(f"Local maximizer lowered the score from {start_score!r} to {score!r}")
    return _finish_step(problem, weights, positive, state, verify, strict_pct)


@dataclass(eq=False)
class PomrfTrace:
    """Joint samples as a herding trace plus per-case imputations over time."""

    trace: HerdingTrace
    imputations: np.ndarray = field(repr=False)
    positive_feature_sum: np.ndarray = field(repr=False)

    @property
    def steps(self) -> int:
        return self.trace.steps

    def moment_gap(self) -> np.ndarray:
        """``|(1/T) sum_t positive_t - (1/T) sum_t phi(s*_t)|`` per feature."""
        return np.abs(self.positive_feature_sum - self.trace.running_feature_sum) / self.steps


def _case_batches(n_cases: int, size: int | None) -> list[list[int]]:
    size = size or n_cases
    return [list(range(start, min(start + size, n_cases))) for start in range(0, n_cases, size)]


def pomrf_run(
    problem: PomrfProblem,
    initial_weights: np.ndarray | None,
    steps: int,
    maximizer: Maximizer,
    joint_maximizer: Maximizer | None = None,
    *,
    variant: Variant | str = Variant.FULL,
    trace_config: TraceConfig | None = None,
    minibatch: int | None = None,
    executor: futures.Executor | None = None,
) -> PomrfTrace:
    """Run ``steps`` POMRF updates and record joint samples and imputations.

    ``initial_weights=None`` starts from the positive average of the initial imputations.
    Minibatches cycle over the cases in order. For the tractable variant ``joint_maximizer`` is
    the local search started at the lowest-energy case.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    variant = Variant(variant)
    config = trace_config if trace_config is not None else TraceConfig()
    joint = joint_maximizer if joint_maximizer is not None else maximizer
    weights = (
        problem.positive_average() if initial_weights is None else np.array(initial_weights, dtype=np.float64)
    )
    verify = config.verify if config.verify is not None else not (joint.exact and maximizer.exact)
    if variant == Variant.TRACTABLE and config.verify is None:
        verify = True
    log.info(
        "POMRF herding (%s) for %d steps over %d cases with %d hidden variables",
        variant,
        steps,
        problem.n_cases,
        problem.n_hidden,
    )

    recorder = TraceRecorder(problem.fmap.space, weights, config, steps)
    imputations = np.zeros((steps, problem.n_cases, problem.n_hidden), dtype=np.int64)
    positive_sum = np.zeros(problem.fmap.dim)
    batches = _case_batches(problem.n_cases, minibatch)
    previous: State | None = None
    for step in range(1, steps + 1):
        cases = batches[(step - 1) % len(batches)]
        if variant == Variant.FULL:
            result = pomrf_step(
                problem,
                weights,
                maximizer,
                joint,
                cases=cases,
                previous=previous,
                verify=verify,
                strict_pct=config.strict_pct,
                executor=executor,
            )
        else:
            result = tractable_pomrf_step(
                problem,
                weights,
                maximizer,
                joint,
                cases=cases,
                verify=verify,
                strict_pct=config.strict_pct,
                executor=executor,
            )
        previous = result.joint_state
        weights = result.weights
        positive_sum += result.positive
        imputations[step - 1] = result.imputations
        recorder.record(result.joint_state, result.negative, weights, result.pct_violated)

    trace = recorder.finish(
        {
            "variant": str(variant),
            "maximizer": maximizer.kind,
            "joint_maximizer": joint.kind,
            "pct_verified": bool(verify),
        }
    )
    expected = trace.initial_weights + positive_sum - trace.running_feature_sum
    residual = float(np.max(np.abs(trace.final_weights - expected)))
    if residual > IDENTITY_TOLERANCE * steps:
        log.error("Moment identity residual %.3g exceeds %.3g", residual, IDENTITY_TOLERANCE * steps)
        raise HerdingError(f"Moment identity residual {residual:.3g} exceeds tolerance")
    return PomrfTrace(trace, imputations, positive_sum)


def hidden_marginal_entropy(hidden_samples: np.ndarray, cardinality: int = 2) -> np.ndarray:
    """Entropy in bits of each hidden unit's marginal over all samples.

    ``hidden_samples`` has the hidden units on its last axis; other axes are pooled.
    """
    samples = np.asarray(hidden_samples, dtype=np.int64)
    flat = samples.reshape(-1, samples.shape[-1])
    counts = np.stack([np.bincount(flat[:, unit], minlength=cardinality) for unit in range(flat.shape[1])])
    return entropy(counts, base=2, axis=1)
