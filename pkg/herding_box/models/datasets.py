"""Seeded synthetic two-class datasets for conditional herding."""

from __future__ import annotations

import numpy as np

from ..conditional import LabeledDataset


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def separable_dataset(n_cases: int, dim: int = 2, seed: int = 0, margin: float = 0.1) -> LabeledDataset:
    """Points in [-1, 1]^dim labelled by a random hyperplane through the origin, at least ``margin`` away."""
    rng = _rng(seed)
    normal = rng.standard_normal(dim)
    normal /= np.linalg.norm(normal)
    accepted: list[np.ndarray] = []
    while sum(len(a) for a in accepted) < n_cases:
        points = rng.uniform(-1.0, 1.0, size=(2 * n_cases, dim))
        accepted.append(points[np.abs(points @ normal) > margin])
    inputs = np.vstack(accepted)[:n_cases]
    return LabeledDataset(inputs, (inputs @ normal > 0.0).astype(np.int64), 2)


def banana_dataset(n_cases: int, seed: int = 0, noise: float = 0.1) -> LabeledDataset:
    """Two interleaved crescents; class 1 is the lower, shifted one."""
    rng = _rng(seed)
    labels = rng.integers(0, 2, size=n_cases)
    angles = rng.uniform(0.0, np.pi, size=n_cases)
    upper = np.column_stack([np.cos(angles), np.sin(angles)])
    lower = np.column_stack([1.0 - np.cos(angles), 0.5 - np.sin(angles)])
    inputs = np.where(labels[:, np.newaxis] == 1, lower, upper) + noise * rng.standard_normal((n_cases, 2))
    # centred on the origin
    inputs -= np.array([0.5, 0.25])
    return LabeledDataset(inputs, labels, 2)


def xor_dataset(n_cases: int, seed: int = 0, noise: float = 0.0, gap: float = 0.1) -> LabeledDataset:
    """Uniform points in [-1, 1]^2 labelled 1 where ``x1 * x2 > 0``, kept ``gap`` away from the axes."""
    rng = _rng(seed)
    magnitudes = rng.uniform(gap, 1.0, size=(n_cases, 2))
    signs = np.where(rng.random((n_cases, 2)) < 0.5, -1.0, 1.0)
    inputs = magnitudes * signs
    labels = (inputs[:, 0] * inputs[:, 1] > 0.0).astype(np.int64)
    if noise > 0.0:
        inputs = inputs + noise * rng.standard_normal(inputs.shape)
    return LabeledDataset(inputs, labels, 2)
