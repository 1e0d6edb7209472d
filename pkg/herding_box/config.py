"""Resolved run configuration embedded in every output's metadata."""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np


def _plain(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


@dataclass(frozen=True)
class RunConfig:
    """Subcommand name plus every resolved setting; a run is reproducible from it alone."""

    command: str
    settings: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, command: str, args: argparse.Namespace) -> RunConfig:
        settings = {key: _plain(value) for key, value in sorted(vars(args).items()) if key != "config"}
        return cls(command, settings)

    def get(self, key: str, default: Any = None) -> Any:
        return self.settings.get(key, default)

    def to_dict(self) -> dict[str, Any]:
        return {"command": self.command, **self.settings}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, values: dict[str, Any]) -> RunConfig:
        settings = dict(values)
        command = settings.pop("command", "")
        return cls(str(command), settings)
