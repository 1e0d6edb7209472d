"""Ising lattices: feature map, Swendsen-Wang moment oracle and herding by coordinate descent.

Spins are stored as variable values 0/1 and read as -1/+1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, override

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..engine import herd_run
from ..feature_map import FeatureMap
from ..maximizer import PersistentCoordinateAscentMaximizer
from ..moments import MomentVector, Provenance
from ..state_space import StateSpace
from ..trace import HerdingTrace, TraceConfig

log = logging.getLogger(__name__)

BETA_CRITICAL = math.log(1.0 + math.sqrt(2.0)) / 2.0
DEFAULT_ISING_SWEEPS = 50
# Largest lattice handled by exact enumeration.
MAX_EXACT_SITES = 20


def to_spins(values: np.ndarray) -> np.ndarray:
    """Map variable values 0/1 to spins -1/+1."""
    return 2 * np.asarray(values, dtype=np.int64) - 1


@dataclass(frozen=True)
class IsingLattice:
    """``height`` x ``width`` grid of binary nodes, numbered row-major."""

    height: int
    width: int
    periodic: bool = True

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise ValueError(f"Lattice dimensions must be >= 1, got {self.height}x{self.width}")

    @property
    def n_sites(self) -> int:
        return self.height * self.width

    @cached_property
    def edges(self) -> np.ndarray:
        """Edge list (E, 2): right then down neighbour of every node in row-major order."""
        pairs: list[tuple[int, int]] = []
        for row in range(self.height):
            for col in range(self.width):
                node = row * self.width + col
                if col + 1 < self.width or (self.periodic and self.width > 2):
                    pairs.append((node, row * self.width + (col + 1) % self.width))
                if row + 1 < self.height or (self.periodic and self.height > 2):
                    pairs.append((node, ((row + 1) % self.height) * self.width + col))
        return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def incidence(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per node: (edge indices, neighbour nodes)."""
        per_node: list[tuple[list[int], list[int]]] = [([], []) for _ in range(self.n_sites)]
        for index, (a, b) in enumerate(self.edges):
            per_node[a][0].append(index)
            per_node[a][1].append(int(b))
            per_node[b][0].append(index)
            per_node[b][1].append(int(a))
        return [(np.asarray(e, dtype=np.int64), np.asarray(n, dtype=np.int64)) for e, n in per_node]

    def space(self) -> StateSpace:
        return StateSpace((2,) * self.n_sites, tuple(f"s{i}" for i in range(self.n_sites)))


class IsingFeatureMap(FeatureMap):
    """Features ``(x_i for every node, x_i x_j for every edge)`` in +-1 encoding."""

    def __init__(self, lattice: IsingLattice) -> None:
        dim = lattice.n_sites + lattice.n_edges
        super().__init__(lattice.space(), dim, norm_bound=math.sqrt(dim))
        self.lattice = lattice

    @override
    def evaluate(self, assignment: Sequence[int] | np.ndarray) -> np.ndarray:
        spins = to_spins(assignment).astype(np.float64)
        edges = self.lattice.edges
        return np.concatenate([spins, spins[edges[:, 0]] * spins[edges[:, 1]]])

    @override
    def local_scores(self, weights: np.ndarray, assignment: np.ndarray, variable: int) -> np.ndarray:
        """Scores of spin -1 and +1 at ``variable`` up to a shared constant."""
        edge_index, neighbours = self.lattice.incidence[variable]
        n_sites = self.lattice.n_sites
        field_ = weights[variable] + float(np.dot(weights[n_sites + edge_index], to_spins(assignment[neighbours])))
        return np.array([-field_, field_])


@dataclass(frozen=True, eq=False)
class SwendsenWangResult:
    spins: np.ndarray = field(repr=False)
    edge_moment: float
    edge_moments: np.ndarray = field(repr=False)
    node_moment: float
    standard_error: float


def _bond_clusters(n_sites: int, edges: np.ndarray) -> tuple[int, np.ndarray]:
    graph = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n_sites, n_sites))
    return connected_components(graph, directed=False)


def swendsen_wang_sample(
    lattice: IsingLattice, beta: float, steps: int, seed: int = 0, burn_in: int = 100
) -> SwendsenWangResult:
    """Cluster-flip chain for ``P(s) ~ exp(beta sum_edges s_i s_j)``.

    Equal neighbours are bonded with probability ``1 - exp(-2 beta)``; each bond cluster flips
    with probability 1/2. Returns ``steps`` post-burn-in samples and their edge statistics.
    """
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    rng = np.random.Generator(np.random.PCG64(seed))
    edges = lattice.edges
    bond_probability = -math.expm1(-2.0 * beta)
    spins = np.where(rng.random(lattice.n_sites) < 0.5, -1, 1).astype(np.int8)
    samples = np.empty((steps, lattice.n_sites), dtype=np.int8)
    log.info("Swendsen-Wang on %dx%d at beta=%.6g for %d steps", lattice.height, lattice.width, beta, steps)
    for sweep in range(burn_in + steps):
        equal = spins[edges[:, 0]] == spins[edges[:, 1]]
        bonded = equal & (rng.random(len(edges)) < bond_probability)
        n_clusters, labels = _bond_clusters(lattice.n_sites, edges[bonded])
        flips = rng.random(n_clusters) < 0.5
        spins = np.where(flips[labels], -spins, spins).astype(np.int8)
        if sweep >= burn_in:
            samples[sweep - burn_in] = spins
    products = samples[:, edges[:, 0]].astype(np.float64) * samples[:, edges[:, 1]]
    per_sample = products.mean(axis=1) if len(edges) else np.zeros(steps)
    standard_error = float(np.std(per_sample, ddof=1) / math.sqrt(steps)) if steps > 1 else math.inf
    return SwendsenWangResult(
        spins=samples,
        edge_moment=float(np.mean(per_sample)),
        edge_moments=products.mean(axis=0),
        node_moment=float(np.mean(samples)),
        standard_error=standard_error,
    )


def exact_edge_moment(lattice: IsingLattice, beta: float) -> float:
    """Mean ``s_i s_j`` over edges under the Ising distribution, by enumeration."""
    if lattice.n_sites > MAX_EXACT_SITES:
        raise ValueError(f"Exact enumeration supports at most {MAX_EXACT_SITES} sites")
    spins = to_spins(lattice.space().assignments)
    edges = lattice.edges
    products = spins[:, edges[:, 0]] * spins[:, edges[:, 1]]
    energy = beta * products.sum(axis=1)
    weights = np.exp(energy - np.max(energy))
    return float(np.dot(weights, products.mean(axis=1)) / np.sum(weights))


@dataclass(frozen=True)
class IsingConfig:
    lattice: IsingLattice
    node_moment: float = 0.0
    edge_moment: float = 0.0
    max_sweeps: int = DEFAULT_ISING_SWEEPS
    snapshot_stride: int = 100
    strict_pct: bool = False

    def __post_init__(self) -> None:
        for name in ("node_moment", "edge_moment"):
            if not -1.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [-1, 1], got {getattr(self, name)}")


def ising_moments(config: IsingConfig, fmap: IsingFeatureMap) -> MomentVector:
    values = np.concatenate(
        [np.full(config.lattice.n_sites, config.node_moment), np.full(config.lattice.n_edges, config.edge_moment)]
    )
    return MomentVector.for_features(fmap, values, Provenance.ORACLE_ESTIMATE)


def ising_herd_run(config: IsingConfig, steps: int) -> tuple[HerdingTrace, IsingFeatureMap, MomentVector]:
    """Herd node and edge moments with persistent coordinate descent in row-major order.

    PCT verification is always on; violations are counted, or raise with ``strict_pct``.
    """
    fmap = IsingFeatureMap(config.lattice)
    moments = ising_moments(config, fmap)
    maximizer = PersistentCoordinateAscentMaximizer(range(config.lattice.n_sites), config.max_sweeps)
    trace = herd_run(
        None,
        moments,
        fmap,
        maximizer,
        steps,
        TraceConfig(snapshot_stride=config.snapshot_stride, verify=True, strict_pct=config.strict_pct),
    )
    return trace, fmap, moments


@dataclass(frozen=True, eq=False)
class ComponentHistogram:
    sizes: np.ndarray
    counts: np.ndarray
    slope: float | None


def component_sizes(spins: np.ndarray, lattice: IsingLattice) -> np.ndarray:
    """Sizes of same-spin connected components of one configuration."""
    spins = np.asarray(spins).reshape(-1)
    edges = lattice.edges
    same = spins[edges[:, 0]] == spins[edges[:, 1]]
    _, labels = _bond_clusters(lattice.n_sites, edges[same])
    return np.bincount(labels)


def component_size_histogram(samples: np.ndarray, lattice: IsingLattice) -> ComponentHistogram:
    """Histogram of component sizes over all samples with a log-log slope fit."""
    all_sizes = np.concatenate([component_sizes(row, lattice) for row in np.atleast_2d(samples)])
    sizes, counts = np.unique(all_sizes, return_counts=True)
    slope = float(np.polyfit(np.log(sizes), np.log(counts), 1)[0]) if len(sizes) >= 2 else None
    return ComponentHistogram(sizes, counts, slope)
