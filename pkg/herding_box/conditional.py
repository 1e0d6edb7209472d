"""Conditional (discriminative) herding.

The energy is ``x^T W z + y^T B z + theta^T z + alpha^T y + x^T U y`` over continuous inputs
``x``, sign-coded labels ``y`` and hidden units ``z`` in {-1, +1}^M. Parameters live in one flat
weight vector with the blocks in that order; ``alpha`` and ``U`` are optional.

Labels are either scalar (candidates ``-1, +1``, index 0 and 1) or 1-of-K sign vectors with one
``+1``. All maximizations are exact: for fixed ``(x, y)`` the best hidden state is
``z_k = +1`` iff its activation is positive, and labels are enumerated with ties going to the
lowest index.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property

import numpy as np

from .engine import check_finite, pct_violated
from .exceptions import ConfigError, DimensionMismatchError, PctViolationError

log = logging.getLogger(__name__)

# Updates between halvings of the entropy-encouraging weight.
ENTROPY_HALVING_PERIOD = 500
DEFAULT_BURN_IN = 1000


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Real-valued inputs (n, d) with integer class labels in 0..n_classes-1."""

    inputs: np.ndarray
    labels: np.ndarray
    n_classes: int = 0

    def __post_init__(self) -> None:
        inputs = np.array(self.inputs, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if inputs.ndim != 2:
            raise DimensionMismatchError(f"Inputs must be 2-D, got shape {inputs.shape}")
        if len(inputs) != len(labels):
            raise DimensionMismatchError(f"Got {len(inputs)} inputs and {len(labels)} labels")
        n_classes = self.n_classes or (int(labels.max()) + 1 if len(labels) else 0)
        if len(labels) and (labels.min() < 0 or labels.max() >= n_classes):
            raise ConfigError(f"Labels must lie in 0..{n_classes - 1}")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_classes", n_classes)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def sign_labels(self) -> np.ndarray:
        """1-of-K sign vectors: +1 at the label, -1 elsewhere."""
        return np.where(np.arange(self.n_classes)[np.newaxis, :] == self.labels[:, np.newaxis], 1.0, -1.0)

    def subset(self, indices: np.ndarray) -> LabeledDataset:
        return LabeledDataset(self.inputs[indices], self.labels[indices], self.n_classes)

    def split(self, test_fraction: float, seed: int = 0) -> tuple[LabeledDataset, LabeledDataset]:
        """Seeded random train/test partition; each part keeps the original case order."""
        if not 0.0 < test_fraction < 1.0:
            raise ConfigError(f"test_fraction must lie in (0, 1), got {test_fraction}")
        rng = np.random.Generator(np.random.PCG64(seed))
        is_test = np.zeros(len(self), dtype=bool)
        is_test[rng.permutation(len(self))[: int(round(test_fraction * len(self)))]] = True
        return self.subset(np.flatnonzero(~is_test)), self.subset(np.flatnonzero(is_test))


def augment_normalization_feature(
    dataset: LabeledDataset, r_max: float | None = None
) -> tuple[LabeledDataset, float]:
    """Append ``sqrt(R_max^2 - ||x||^2)`` so every input has norm ``R_max``.

    ``R_max`` defaults to the largest input norm of ``dataset``; pass the training value when
    augmenting test data. Inputs longer than ``R_max`` get 0.
    """
    norms_sq = np.sum(dataset.inputs**2, axis=1)
    if r_max is None:
        r_max = float(math.sqrt(np.max(norms_sq))) if len(norms_sq) else 0.0
    extra = np.sqrt(np.maximum(r_max * r_max - norms_sq, 0.0))
    augmented = np.hstack([dataset.inputs, extra[:, np.newaxis]])
    return LabeledDataset(augmented, dataset.labels, dataset.n_classes), r_max


class LabelMode(StrEnum):
    SCALAR = "scalar"
    ONE_HOT = "one-hot"


@dataclass(frozen=True)
class CondModel:
    """Block layout of the conditional herding weight vector."""

    input_dim: int
    n_classes: int
    hidden: int
    label_mode: LabelMode = LabelMode.ONE_HOT
    label_bias: bool = True
    direct: bool = True

    def __post_init__(self) -> None:
        if self.input_dim < 1 or self.hidden < 0:
            raise ConfigError(f"Need input_dim >= 1 and hidden >= 0, got {self.input_dim}, {self.hidden}")
        if self.label_mode == LabelMode.SCALAR and self.n_classes != 2:
            raise ConfigError("Scalar labels need exactly 2 classes")
        if self.n_classes < 2:
            raise ConfigError(f"Need at least 2 classes, got {self.n_classes}")

    @property
    def label_dim(self) -> int:
        return 1 if self.label_mode == LabelMode.SCALAR else self.n_classes

    @cached_property
    def shapes(self) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {
            "W": (self.input_dim, self.hidden),
            "B": (self.label_dim, self.hidden),
            "theta": (self.hidden,),
        }
        if self.label_bias:
            shapes["alpha"] = (self.label_dim,)
        if self.direct:
            shapes["U"] = (self.input_dim, self.label_dim)
        return shapes

    @cached_property
    def offsets(self) -> dict[str, slice]:
        offsets: dict[str, slice] = {}
        start = 0
        for name, shape in self.shapes.items():
            size = math.prod(shape)
            offsets[name] = slice(start, start + size)
            start += size
        return offsets

    @property
    def dim(self) -> int:
        return sum(math.prod(shape) for shape in self.shapes.values())

    @cached_property
    def label_vectors(self) -> np.ndarray:
        """Candidate sign-coded labels in label-index order."""
        if self.label_mode == LabelMode.SCALAR:
            return np.array([[-1.0], [1.0]])
        return 2.0 * np.eye(self.n_classes) - 1.0

    def block(self, weights: np.ndarray, name: str) -> np.ndarray:
        return weights[self.offsets[name]].reshape(self.shapes[name])

    def hidden_activation(self, weights: np.ndarray, inputs: np.ndarray, label_signs: np.ndarray) -> np.ndarray:
        return inputs @ self.block(weights, "W") + label_signs @ self.block(weights, "B") + self.block(weights, "theta")

    def best_hidden(self, weights: np.ndarray, inputs: np.ndarray, label_signs: np.ndarray) -> np.ndarray:
        """Positive phase: ``argmax_z`` per case with the label clamped."""
        return np.where(self.hidden_activation(weights, inputs, label_signs) > 0.0, 1.0, -1.0)

    def negative_phase(self, weights: np.ndarray, inputs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Joint ``argmax_{y, z}`` per case: (label indices, hidden states)."""
        n = len(inputs)
        best_score = np.full(n, -np.inf)
        best_label = np.zeros(n, dtype=np.int64)
        best_hidden = np.empty((n, self.hidden))
        direct = inputs @ self.block(weights, "U") if self.direct else None
        for index, signs in enumerate(self.label_vectors):
            label_signs = np.broadcast_to(signs, (n, self.label_dim))
            activation = self.hidden_activation(weights, inputs, label_signs)
            hidden = np.where(activation > 0.0, 1.0, -1.0)
            score = np.sum(hidden * activation, axis=1)
            if self.label_bias:
                score = score + float(np.dot(self.block(weights, "alpha"), signs))
            if direct is not None:
                score = score + direct @ signs
            better = score > best_score
            best_score = np.where(better, score, best_score)
            best_label[better] = index
            best_hidden[better] = hidden[better]
        return best_label, best_hidden

    def batch_features(self, inputs: np.ndarray, label_signs: np.ndarray, hidden: np.ndarray) -> np.ndarray:
        """Average feature vector over a batch of cases."""
        n = len(inputs)
        blocks = [(inputs.T @ hidden) / n, (label_signs.T @ hidden) / n, np.sum(hidden, axis=0) / n]
        if self.label_bias:
            blocks.append(np.sum(label_signs, axis=0) / n)
        if self.direct:
            blocks.append((inputs.T @ label_signs) / n)
        return np.concatenate([block.reshape(-1) for block in blocks])

    def features(self, x: np.ndarray, label_signs: np.ndarray, hidden: np.ndarray) -> np.ndarray:
        return self.batch_features(
            np.atleast_2d(x), np.atleast_2d(label_signs), np.asarray(hidden, dtype=np.float64).reshape(1, -1)
        )

    def init_weights(self, rng: np.random.Generator, scale: float, rescale: bool = True) -> np.ndarray:
        """Centered normal per block with std ``scale / block size`` (or ``scale`` without rescale)."""
        weights = np.zeros(self.dim)
        for name, shape in self.shapes.items():
            size = math.prod(shape)
            if size:
                std = scale / size if rescale else scale
                weights[self.offsets[name]] = std * rng.standard_normal(size)
        return weights

    def learning_rates(self, rate: float, rescale: bool = True) -> np.ndarray | None:
        """Per-block rates ``rate / block size``; None for the plain unit rate."""
        if not rescale and rate == 1.0:
            return None
        rates = np.full(self.dim, float(rate))
        if rescale:
            for name, shape in self.shapes.items():
                rates[self.offsets[name]] = rate / max(math.prod(shape), 1)
        return rates


def entropy_lambda(lambda0: float, count: int) -> float:
    """``lambda0`` halved once every ``ENTROPY_HALVING_PERIOD`` updates."""
    return lambda0 * 0.5 ** (count // ENTROPY_HALVING_PERIOD)


def entropy_bias_update(
    theta: np.ndarray,
    positive_hidden: np.ndarray,
    negative_hidden: np.ndarray,
    lambda0: float,
    count: int,
    learning_rate: float | np.ndarray = 1.0,
) -> tuple[np.ndarray, float]:
    """``theta + eta * mean((1 - lambda) z_pos - z_neg)`` and the weight for the next update.

    ``lambda = 1`` only pushes against the current negative hidden states; ``lambda = 0`` is the
    plain herding bias update.
    """
    lam = entropy_lambda(lambda0, count)
    if not 0.0 <= lam <= 1.0:
        raise ConfigError(f"lambda must lie in [0, 1], got {lam}")
    step = np.mean((1.0 - lam) * positive_hidden - negative_hidden, axis=0)
    return theta + learning_rate * step, entropy_lambda(lambda0, count + 1)


@dataclass(frozen=True, eq=False)
class CondStepResult:
    positive_hidden: np.ndarray
    negative_labels: np.ndarray
    negative_hidden: np.ndarray
    weights: np.ndarray
    positive_features: np.ndarray
    negative_features: np.ndarray
    errors: int
    pct_violated: bool


def cond_step(
    model: CondModel,
    weights: np.ndarray,
    inputs: np.ndarray,
    labels: np.ndarray,
    *,
    learning_rate: np.ndarray | None = None,
    verify: bool = True,
    strict_pct: bool = False,
    entropy: tuple[float, int] | None = None,
) -> CondStepResult:
    """One conditional herding update on a minibatch.

    ``w' = w + mean phi(x_i, y_i, z'_i) - mean phi(x_i, y*_i, z*_i)``. ``labels`` are label
    indices. ``entropy=(lambda0, count)`` replaces the ``theta`` update by the
    entropy-encouraging one.
    """
    if len(inputs) == 0:
        raise ConfigError("Minibatch must not be empty")
    if inputs.shape[1] != model.input_dim:
        raise DimensionMismatchError(f"Inputs have {inputs.shape[1]} columns, model expects {model.input_dim}")
    signs = model.label_vectors[labels]
    positive_hidden = model.best_hidden(weights, inputs, signs)
    negative_labels, negative_hidden = model.negative_phase(weights, inputs)
    positive = model.batch_features(inputs, signs, positive_hidden)
    negative = model.batch_features(inputs, model.label_vectors[negative_labels], negative_hidden)
    update = positive - negative
    violated = False
    if verify and pct_violated(weights, update):
        violated = True
        inner = float(np.dot(weights, update))
        if strict_pct:
            log.error("PCT violation in conditional step: w^T v = %.17g", inner)
            raise PctViolationError(f"PCT violation: w^T v = {inner!r}", inner_product=inner)
        log.warning("PCT violation in conditional step: w^T v = %.17g", inner)
    new_weights = weights + update if learning_rate is None else weights + learning_rate * update
    if entropy is not None and model.hidden:
        theta_slice = model.offsets["theta"]
        rate = 1.0 if learning_rate is None else learning_rate[theta_slice]
        new_weights[theta_slice], _ = entropy_bias_update(
            weights[theta_slice], positive_hidden, negative_hidden, entropy[0], entropy[1], rate
        )
    check_finite(new_weights)
    return CondStepResult(
        positive_hidden=positive_hidden,
        negative_labels=negative_labels,
        negative_hidden=negative_hidden,
        weights=new_weights,
        positive_features=positive,
        negative_features=negative,
        errors=int(np.count_nonzero(negative_labels != labels)),
        pct_violated=violated,
    )


@dataclass(eq=False)
class VoteAccumulator:
    """Per test case label counts and summed per-class outputs over prediction steps."""

    n_cases: int
    n_classes: int
    counts: np.ndarray = field(init=False)
    totals: np.ndarray = field(init=False)
    steps: int = 0

    def __post_init__(self) -> None:
        self.counts = np.zeros((self.n_cases, self.n_classes), dtype=np.int64)
        self.totals = np.zeros((self.n_cases, self.n_classes))

    def add(self, labels: np.ndarray, outputs: np.ndarray | None = None) -> None:
        """One vote per case for ``labels``; ``outputs`` (n, K) default to 1-of-K indicators."""
        rows = np.arange(self.n_cases)
        self.counts[rows, labels] += 1
        if outputs is None:
            self.totals[rows, labels] += 1.0
        else:
            self.totals += outputs
        self.steps += 1

    def predictions(self) -> np.ndarray:
        """Label with the largest online average; lowest index on ties."""
        return np.argmax(self.totals, axis=1)

    def error(self, labels: np.ndarray) -> float:
        if self.n_cases == 0:
            return 0.0
        return float(np.mean(self.predictions() != labels))


def cond_predict_step(model: CondModel, weights: np.ndarray, inputs: np.ndarray, votes: VoteAccumulator) -> np.ndarray:
    """Add one vote per test case for its maximizing label under ``weights``."""
    labels, _ = model.negative_phase(weights, inputs)
    votes.add(labels)
    return labels


class Procedure(StrEnum):
    JOINT = "joint"
    ONE_VS_ALL = "one-vs-all"


@dataclass(frozen=True)
class CondConfig:
    """Settings of a conditional herding run.

    ``minibatch=None`` uses the full training set. ``init_scale`` and ``learning_rate`` are
    divided by each block's element count when ``rescale`` is set.
    """

    procedure: Procedure = Procedure.JOINT
    hidden: int = 20
    minibatch: int | None = None
    burn_in: int = DEFAULT_BURN_IN
    init_scale: float = 1.0
    learning_rate: float = 1.0
    rescale: bool = True
    label_bias: bool = True
    direct: bool = True
    entropy_lambda: float = 0.0
    verify: bool = True
    strict_pct: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "procedure", Procedure(self.procedure))
        if self.minibatch is not None and self.minibatch < 1:
            raise ConfigError(f"minibatch must be >= 1, got {self.minibatch}")
        if self.burn_in < 0:
            raise ConfigError(f"burn_in must be >= 0, got {self.burn_in}")
        if not 0.0 <= self.entropy_lambda <= 1.0:
            raise ConfigError(f"entropy_lambda must lie in [0, 1], got {self.entropy_lambda}")


class CondHerder:
    """One conditional herding chain with its stopping bookkeeping."""

    log = logging.getLogger(__name__)

    def __init__(self, model: CondModel, config: CondConfig, rng: np.random.Generator, n_train: int) -> None:
        self.model = model
        self.config = config
        self.weights = model.init_weights(rng, config.init_scale, config.rescale)
        self.initial_weights = self.weights.copy()
        self.rates = model.learning_rates(config.learning_rate, config.rescale)
        batch = config.minibatch or n_train
        self.patience = math.ceil(n_train / batch)
        self.streak = 0
        self.updates = 0
        self.converged = False
        self.pct_violations: list[int] = []
        self.errors: list[int] = []
        self.positive_sum = np.zeros(model.dim)
        self.negative_sum = np.zeros(model.dim)
        self.max_weight_inf_norm = float(np.max(np.abs(self.weights))) if model.dim else 0.0

    def step(self, inputs: np.ndarray, labels: np.ndarray) -> None:
        if self.converged:
            return
        entropy = (self.config.entropy_lambda, self.updates) if self.config.entropy_lambda > 0.0 else None
        result = cond_step(
            self.model,
            self.weights,
            inputs,
            labels,
            learning_rate=self.rates,
            verify=self.config.verify,
            strict_pct=self.config.strict_pct,
            entropy=entropy,
        )
        self.updates += 1
        self.weights = result.weights
        self.positive_sum += result.positive_features
        self.negative_sum += result.negative_features
        self.max_weight_inf_norm = max(self.max_weight_inf_norm, float(np.max(np.abs(self.weights))))
        self.errors.append(result.errors)
        if result.pct_violated:
            self.pct_violations.append(self.updates)
        self.streak = self.streak + 1 if result.errors == 0 else 0
        if self.streak >= self.patience:
            self.log.debug("Converged after %d updates", self.updates)
            self.converged = True

    def outputs(self, inputs: np.ndarray) -> np.ndarray:
        labels, _ = self.model.negative_phase(self.weights, inputs)
        return labels


@dataclass(eq=False)
class CondRunResult:
    votes: VoteAccumulator
    herders: list[CondHerder]
    stop_reason: str
    steps: int
    test_error: float | None = None

    @property
    def pct_violations(self) -> int:
        return sum(len(h.pct_violations) for h in self.herders)

    @property
    def training_errors(self) -> list[list[int]]:
        return [h.errors for h in self.herders]


def _batches(n_cases: int, size: int | None) -> list[np.ndarray]:
    size = size or n_cases
    return [np.arange(start, min(start + size, n_cases)) for start in range(0, n_cases, size)]


def cond_run(
    train: LabeledDataset, test: LabeledDataset | None, config: CondConfig, steps: int
) -> CondRunResult:
    """Train by conditional herding and accumulate test votes after burn-in.

    Minibatches cycle in data order. A herder stops updating once its training error was 0 for
    ``ceil(D / d)`` consecutive minibatches; the run stops when every herder has stopped.
    """
    if steps < 1:
        raise ConfigError(f"steps must be >= 1, got {steps}")
    if len(train) == 0:
        raise ConfigError("Training set is empty")
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n_classes = max(train.n_classes, test.n_classes if test is not None else 0)
    if config.procedure == Procedure.JOINT:
        models = [
            CondModel(train.input_dim, n_classes, config.hidden, LabelMode.ONE_HOT, config.label_bias, config.direct)
        ]
        targets = [train.labels]
    else:
        models = [
            CondModel(train.input_dim, 2, config.hidden, LabelMode.SCALAR, config.label_bias, config.direct)
            for _ in range(n_classes)
        ]
        targets = [(train.labels == k).astype(np.int64) for k in range(n_classes)]
    herders = [CondHerder(model, config, rng, len(train)) for model in models]
    votes = VoteAccumulator(len(test) if test is not None else 0, n_classes)
    batches = _batches(len(train), config.minibatch)
    log.info(
        "Conditional herding (%s, M=%d, %d batches) for up to %d steps",
        config.procedure,
        config.hidden,
        len(batches),
        steps,
    )

    stop_reason = "max-steps"
    step = 0
    for step in range(1, steps + 1):
        batch = batches[(step - 1) % len(batches)]
        for herder, target in zip(herders, targets):
            herder.step(train.inputs[batch], target[batch])
        if test is not None and len(test) and step > config.burn_in:
            _vote(herders, config.procedure, test.inputs, votes)
        if all(h.converged for h in herders):
            stop_reason = "converged"
            break
    if test is not None and len(test) and votes.steps == 0:
        _vote(herders, config.procedure, test.inputs, votes)

    result = CondRunResult(votes, herders, stop_reason, step)
    if test is not None and len(test):
        result.test_error = votes.error(test.labels)
    log.info(
        "Conditional herding stopped (%s) after %d steps, test error %s, %d PCT violations",
        stop_reason,
        step,
        result.test_error,
        result.pct_violations,
    )
    return result


def _vote(herders: list[CondHerder], procedure: Procedure, inputs: np.ndarray, votes: VoteAccumulator) -> None:
    if procedure == Procedure.JOINT:
        cond_predict_step(herders[0].model, herders[0].weights, inputs, votes)
        return
    outputs = np.column_stack([2.0 * h.outputs(inputs) - 1.0 for h in herders])
    votes.add(np.argmax(outputs, axis=1), outputs)


@dataclass(frozen=True, eq=False)
class PerceptronResult:
    weights: np.ndarray

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        """Voted prediction: sign of the average of every iterate's prediction (ties to -1)."""
        votes = np.where(inputs @ self.weights[1:].T > 0.0, 1.0, -1.0)
        return np.where(np.mean(votes, axis=1) > 0.0, 1, -1)


def voted_perceptron(inputs: np.ndarray, targets: np.ndarray, steps: int) -> PerceptronResult:
    """Rosenblatt perceptron from ``w = 0`` cycling the cases in order, ``w += x (y - y_hat)``.

    ``targets`` are +-1; ``y_hat = +1`` iff ``w^T x > 0``. ``weights`` holds w_0..w_steps.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    weights = np.zeros((steps + 1, inputs.shape[1]))
    w = weights[0].copy()
    for t in range(steps):
        x = inputs[t % len(inputs)]
        y = float(targets[t % len(inputs)])
        y_hat = 1.0 if float(np.dot(w, x)) > 0.0 else -1.0
        w = w + (x * y - x * y_hat)
        weights[t + 1] = w
    return PerceptronResult(weights)
