"""Target moment vectors."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from scipy.optimize import linprog

from .exceptions import DimensionMismatchError, MomentFeasibilityError
from .feature_map import FeatureMap

log = logging.getLogger(__name__)

# Allowed L1 slack of the hull membership program, relative to 1 + ||values||_1.
HULL_TOLERANCE = 1e-8


class Provenance(StrEnum):
    DATA_AVERAGE = "data-average"
    ANALYTIC = "analytic"
    ORACLE_ESTIMATE = "oracle-estimate"


def hull_distance(table: np.ndarray, values: np.ndarray) -> float:
    """L1 distance from ``values`` to the convex hull of the rows of ``table``.

    Solves ``min sum(s+ + s-)`` s.t. ``table^T lam + s+ - s- = values``, ``sum(lam) = 1``,
    all variables nonnegative.
    """
    n_states, dim = table.shape
    cost = np.concatenate([np.zeros(n_states), np.ones(2 * dim)])
    a_eq = np.zeros((dim + 1, n_states + 2 * dim))
    a_eq[:dim, :n_states] = table.T
    a_eq[:dim, n_states : n_states + dim] = np.eye(dim)
    a_eq[:dim, n_states + dim :] = -np.eye(dim)
    a_eq[dim, :n_states] = 1.0
    b_eq = np.concatenate([values, [1.0]])
    result = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not result.success:
        raise MomentFeasibilityError(f"Hull membership program failed: {result.message}")
    return float(result.fun)


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Target moments ``phi_bar`` in R^K. Immutable after construction.

    Direct construction only checks the values are finite. ``checked`` is set by ``for_features``
    and ``from_data``; ``validated_for`` runs the feature checks on anything else.
    """

    values: np.ndarray
    provenance: Provenance = Provenance.ANALYTIC
    names: tuple[str, ...] | None = field(default=None, compare=False)
    checked: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        if self.names is not None and len(self.names) != len(values):
            raise DimensionMismatchError(f"Got {len(self.names)} names for {len(values)} moments")
        if not np.all(np.isfinite(values)):
            raise MomentFeasibilityError("Moments must be finite")

    @property
    def dim(self) -> int:
        return len(self.values)

    @classmethod
    def for_features(
        cls,
        fmap: FeatureMap,
        values: np.ndarray,
        provenance: Provenance | str = Provenance.ANALYTIC,
        *,
        check_feasible: bool = True,
        names: tuple[str, ...] | None = None,
    ) -> MomentVector:
        """Construct and validate moments against a feature map.

        For enumerable spaces and provenance other than ``oracle-estimate`` the values must lie in
        the convex hull of the feature vectors.
        """
        moments = cls(values, Provenance(provenance), names, checked=True)
        if moments.dim != fmap.dim:
            raise DimensionMismatchError(f"Moments have dimension {moments.dim}, features have {fmap.dim}")
        if check_feasible and fmap.enumerable and moments.provenance != Provenance.ORACLE_ESTIMATE:
            distance = hull_distance(fmap.feature_table, moments.values)
            if distance > HULL_TOLERANCE * (1.0 + float(np.sum(np.abs(moments.values)))):
                log.error("Moments lie outside the feature hull (L1 distance %.3g)", distance)
                raise MomentFeasibilityError(f"Moments lie outside the convex hull (L1 distance {distance:.3g})")
        return moments

    @classmethod
    def from_data(cls, fmap: FeatureMap, assignments: np.ndarray) -> MomentVector:
        """Data-average moments ``(1/D) sum_i phi(x_i)`` summed left to right."""
        features = fmap.evaluate_many(np.asarray(assignments, dtype=np.int64))
        if len(features) == 0:
            raise MomentFeasibilityError("Cannot average an empty data set")
        total = np.zeros(fmap.dim)
        for row in features:
            total += row
        return cls(total / len(features), Provenance.DATA_AVERAGE, checked=True)

    def check_dimension(self, fmap: FeatureMap) -> None:
        if self.dim != fmap.dim:
            raise DimensionMismatchError(f"Moments have dimension {self.dim}, features have {fmap.dim}")

    def validated_for(self, fmap: FeatureMap) -> MomentVector:
        """These moments if already checked, otherwise a copy checked against ``fmap``."""
        if self.checked:
            self.check_dimension(fmap)
            return self
        return MomentVector.for_features(fmap, self.values, self.provenance, names=self.names)
