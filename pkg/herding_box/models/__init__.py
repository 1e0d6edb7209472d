"""Problem generators and moment oracles."""

from .datasets import banana_dataset, separable_dataset, xor_dataset
from .ising import (
    BETA_CRITICAL,
    DEFAULT_ISING_SWEEPS,
    MAX_EXACT_SITES,
    IsingConfig,
    IsingFeatureMap,
    IsingLattice,
    component_size_histogram,
    exact_edge_moment,
    ising_herd_run,
    swendsen_wang_sample,
)
from .random_mrf import RandomModel, RandomModelSpec, random_mrf
from .rbm import RbmFeatureMap, rbm_features

__all__ = [
    "BETA_CRITICAL",
    "DEFAULT_ISING_SWEEPS",
    "MAX_EXACT_SITES",
    "IsingConfig",
    "IsingFeatureMap",
    "IsingLattice",
    "RandomModel",
    "RandomModelSpec",
    "RbmFeatureMap",
    "banana_dataset",
    "component_size_histogram",
    "exact_edge_moment",
    "ising_herd_run",
    "random_mrf",
    "rbm_features",
    "separable_dataset",
    "swendsen_wang_sample",
    "xor_dataset",
]
