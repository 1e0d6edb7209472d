"""
To parse composite command-line values: model specs, grids, vectors and named constants.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from ..scalar import GOLDEN, SILVER

NAMED_CONSTANTS: dict[str, float] = {
    "golden": GOLDEN,
    "silver": SILVER,
    "rabbit": 2.0 * GOLDEN - 1.0,
    "inv-pi": 1.0 / math.pi,
    "half": 0.5,
}


class ParamParser:
    @staticmethod
    def parse_params(parameters: str | None) -> dict[str, object]:
        r"""Parse a parameter string into a dictionary with typed values.

        Args:
            parameters: A string of parameters in one of these formats:
                       - JSON: "{\"D\": 4, \"K\": 2}"
                       - Comma-separated: "D=4,K=2,seed=7"
                       - None or empty string returns empty dict

        Returns:
            A dictionary with parameter keys and int, float, bool or str values

        Raises:
            ValueError: If parameters is not a string or None, or if parsing fails
        """
        if parameters is not None and not isinstance(parameters, str):
            raise ValueError(f"parameters must be a string or None, got {type(parameters).__name__}")

        if parameters is None or not parameters:
            return {}

        trimmed = parameters.strip()

        if trimmed.startswith("{"):
            try:
                rv = json.loads(trimmed)
            except json.JSONDecodeError as e:
                raise ValueError(f"Invalid JSON format: {e.msg}")
            if not isinstance(rv, dict):
                raise ValueError("JSON parameters must be an object/dictionary")
            return rv

        param_dict: dict[str, object] = {}
        for pair in trimmed.split(","):
            pair = pair.strip()
            if not pair:
                continue
            if "=" not in pair:
                raise ValueError(f"Invalid parameter format: '{pair}' must contain '='")
            key, value = pair.split("=", 1)
            key = key.strip()
            if not key:
                raise ValueError("Parameter key cannot be empty")
            param_dict[key] = ParamParser._typed(value.strip())
        return param_dict

    @staticmethod
    def parse_spec(spec: str) -> tuple[str, dict[str, object]]:
        """Split ``kind:key=value,...`` (or a JSON object with a ``kind`` key) into kind and parameters."""
        trimmed = spec.strip()
        if trimmed.startswith("{"):
            params = ParamParser.parse_params(trimmed)
            kind = params.pop("kind", None)
            if not isinstance(kind, str) or not kind:
                raise ValueError("JSON spec needs a non-empty 'kind'")
            return kind, params
        kind, _, rest = trimmed.partition(":")
        if not kind:
            raise ValueError(f"Spec '{spec}' has no kind")
        return kind.strip(), ParamParser.parse_params(rest)

    @staticmethod
    def parse_constant(text: str) -> float:
        """A number, a fraction like ``1/3`` or one of the named constants."""
        trimmed = text.strip().lower()
        if trimmed in NAMED_CONSTANTS:
            return NAMED_CONSTANTS[trimmed]
        try:
            return float(Fraction(trimmed)) if "/" in trimmed else float(trimmed)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"Invalid constant '{text}': {e}")

    @staticmethod
    def parse_vector(text: str) -> np.ndarray:
        """Comma-separated constants, e.g. ``0.5,0.25,0.25``."""
        parts = [part for part in text.split(",") if part.strip()]
        if not parts:
            raise ValueError("Vector must have at least one entry")
        return np.array([ParamParser.parse_constant(part) for part in parts])

    @staticmethod
    def parse_grid(text: str) -> np.ndarray:
        """``start:stop:count`` for an evenly spaced grid (inclusive), or a comma-separated list."""
        if ":" not in text:
            return ParamParser.parse_vector(text)
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"Invalid grid '{text}': expected start:stop:count")
        start, stop = ParamParser.parse_constant(parts[0]), ParamParser.parse_constant(parts[1])
        try:
            count = int(parts[2])
        except ValueError:
            raise ValueError(f"Invalid grid count '{parts[2]}'")
        if count < 1:
            raise ValueError(f"Grid count must be >= 1, got {count}")
        return np.linspace(start, stop, count)

    @staticmethod
    def _typed(value: str) -> object:
        """Convert a raw value to bool, int, float or leave it as string."""
        lowered = value.lower()
        if lowered in {"true", "false"}:
            return lowered == "true"
        for convert in (int, float):
            try:
                return convert(value)
            except ValueError:
                pass
        return value
