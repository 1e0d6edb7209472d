"""RBM-style feature maps over visible and hidden binary units."""

from __future__ import annotations

from typing import Sequence, override

import numpy as np

from ..feature_map import FeatureMap
from ..state_space import StateSpace
from .ising import to_spins


class RbmFeatureMap(FeatureMap):
    """Features ``{x_j, z_k, x_j z_k}`` in +-1 encoding.

    Variables are the ``visible`` units followed by the ``hidden`` units; value 0 reads as -1.
    The feature vector is the visible block, the hidden-bias block (optional) and the pairwise
    block ordered visible-major (``x_0 z_0, x_0 z_1, ...``).
    """

    def __init__(self, visible: int, hidden: int, include_hidden_bias: bool = True) -> None:
        if visible < 1 or hidden < 0:
            raise ValueError(f"Need visible >= 1 and hidden >= 0, got {visible}, {hidden}")
        self.visible = int(visible)
        self.hidden = int(hidden)
        self.include_hidden_bias = include_hidden_bias
        dim = visible + (hidden if include_hidden_bias else 0) + visible * hidden
        names = tuple(f"x{j}" for j in range(visible)) + tuple(f"z{k}" for k in range(hidden))
        super().__init__(StateSpace((2,) * (visible + hidden), names), dim, norm_bound=float(np.sqrt(dim)))

    @property
    def visible_variables(self) -> list[int]:
        return list(range(self.visible))

    @property
    def hidden_variables(self) -> list[int]:
        return list(range(self.visible, self.visible + self.hidden))

    def split_weights(self, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray | None, np.ndarray]:
        """``(a, b, W)``: visible biases, hidden biases (None if absent) and the (visible, hidden) matrix."""
        a = weights[: self.visible]
        offset = self.visible
        b = None
        if self.include_hidden_bias:
            b = weights[offset : offset + self.hidden]
            offset += self.hidden
        return a, b, weights[offset:].reshape(self.visible, self.hidden)

    @override
    def evaluate(self, assignment: Sequence[int] | np.ndarray) -> np.ndarray:
        self.space.validate(assignment)
        spins = to_spins(assignment).astype(np.float64)
        x, z = spins[: self.visible], spins[self.visible :]
        blocks = [x, z] if self.include_hidden_bias else [x]
        blocks.append(np.outer(x, z).reshape(-1))
        return np.concatenate(blocks)

    @override
    def local_scores(self, weights: np.ndarray, assignment: np.ndarray, variable: int) -> np.ndarray:
        """Scores of unit value -1 and +1 at ``variable`` up to a shared constant."""
        a, b, matrix = self.split_weights(weights)
        spins = to_spins(assignment).astype(np.float64)
        if variable < self.visible:
            field = a[variable] + float(np.dot(matrix[variable], spins[self.visible :]))
        else:
            k = variable - self.visible
            field = (0.0 if b is None else b[k]) + float(np.dot(matrix[:, k], spins[: self.visible]))
        return np.array([-field, field])


def rbm_features(visible: int, hidden: int, include_hidden_bias: bool = True) -> RbmFeatureMap:
    return RbmFeatureMap(visible, hidden, include_hidden_bias)
