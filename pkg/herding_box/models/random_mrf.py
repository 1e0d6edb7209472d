"""Random synthetic MRFs with analytically computed moments."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from ..feature_map import TableFeatureMap
from ..moments import MomentVector, Provenance

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RandomModelSpec:
    """``n_states`` states with ``dim``-dimensional N(0, 1) features and N(0, weight_scale^2) weights.

    The generator is numpy's PCG64 seeded with ``seed``; features are drawn first, then weights.
    """

    n_states: int
    dim: int
    seed: int = 0
    weight_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.n_states < 1 or self.dim < 1:
            raise ValueError(f"n_states and dim must be >= 1, got {self.n_states}, {self.dim}")
        if self.weight_scale < 0.0:
            raise ValueError(f"weight_scale must be >= 0, got {self.weight_scale}")


@dataclass(frozen=True, eq=False)
class RandomModel:
    spec: RandomModelSpec
    fmap: TableFeatureMap
    true_weights: np.ndarray
    moments: MomentVector

    @property
    def distribution(self) -> np.ndarray:
        return softmax(self.fmap.feature_table @ self.true_weights)


def random_mrf(spec: RandomModelSpec) -> RandomModel:
    """Draw a model and compute ``E_{P(x; w)}[phi]`` by exact enumeration at temperature 1."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    features = rng.standard_normal((spec.n_states, spec.dim))
    weights = spec.weight_scale * rng.standard_normal(spec.dim)
    fmap = TableFeatureMap(features)
    probabilities = softmax(features @ weights)
    moments = MomentVector.for_features(fmap, probabilities @ features, Provenance.ANALYTIC)
    log.debug("Random MRF D=%d K=%d seed=%d", spec.n_states, spec.dim, spec.seed)
    return RandomModel(spec, fmap, weights, moments)
