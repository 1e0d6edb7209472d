"""Registry for maximizer strategies."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from .maximizer import (
    CoordinateAscentMaximizer,
    DataInitializedMaximizer,
    ExactEnumerationMaximizer,
    Maximizer,
    PersistentCoordinateAscentMaximizer,
)


@dataclass
class MaximizerType:
    """Data class representing a maximizer kind and its factory."""

    name: str
    description: str
    factory: Callable[[Mapping[str, Any]], Maximizer]

    def json(self) -> str:
        """Return a JSON-serializable representation of the maximizer kind."""
        return json.dumps({"name": self.name, "description": self.description})


class MaximizerRegistry:
    """Registry for managing maximizer strategies.

    Maps a kind name (as used in run configs, e.g. ``coordinate-ascent``) to a factory that
    builds a maximizer from keyword parameters.
    """

    log = logging.getLogger(__name__)
    _kinds: dict[str, MaximizerType] = {}

    @classmethod
    def register(
        cls,
        kind: str,
        factory: Callable[[Mapping[str, Any]], Maximizer],
        description: str = "",
    ) -> None:
        """Register a maximizer factory under a kind name.

        Args:
            kind: Kind identifier (e.g., 'exact-enumeration')
            factory: Callable that creates Maximizer instances from parameters
            description: Human-readable summary shown by ``kinds()``
        """
        cls.log.debug("Registering maximizer kind '%s'", kind)
        cls._kinds[kind] = MaximizerType(kind, description, factory)

    @classmethod
    def create(cls, kind: str, parameters: Mapping[str, Any] | None = None) -> Maximizer:
        """Create a maximizer of the given kind.

        Args:
            kind: Kind identifier
            parameters: Optional factory parameters (sweep_order, max_sweeps, data, ...)

        Returns:
            Maximizer implementation

        Raises:
            ValueError: If the kind is not registered
        """
        cls.log.debug("Creating maximizer of kind '%s' with parameters %s", kind, parameters)
        if not cls._kinds:
            cls.log.error("No maximizer kinds registered")
            raise ValueError("No maximizer kinds registered")
        maximizer_type = cls._kinds.get(kind)
        if maximizer_type is None:
            cls.log.error("Maximizer kind '%s' is not registered. Available kinds: %s", kind, list(cls._kinds.keys()))
            raise ValueError(f"Maximizer kind '{kind}' is not registered")
        return maximizer_type.factory(parameters or {})

    @classmethod
    def kinds(cls) -> list[str]:
        return list(cls._kinds.keys())

    @classmethod
    def get_info(cls) -> list[str]:
        return [maximizer_type.json() for maximizer_type in cls._kinds.values()]


MaximizerRegistry.register(
    ExactEnumerationMaximizer.kind, ExactEnumerationMaximizer.create, "true argmax by enumeration"
)
MaximizerRegistry.register(
    CoordinateAscentMaximizer.kind, CoordinateAscentMaximizer.create, "coordinate ascent from the all-zeros state"
)
MaximizerRegistry.register(
    PersistentCoordinateAscentMaximizer.kind,
    PersistentCoordinateAscentMaximizer.create,
    "coordinate ascent warm-started from the previous sample",
)
MaximizerRegistry.register(
    DataInitializedMaximizer.kind, DataInitializedMaximizer.create, "coordinate ascent from the best data case"
)
