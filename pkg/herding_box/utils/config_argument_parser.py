"""ArgumentParser that supports reading defaults from a flat JSON config file."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, NoReturn, Sequence

from ..exceptions import ConfigError


def str2bool(val: Any) -> bool:
    """Convert various string representations to boolean."""
    if isinstance(val, bool):
        return val
    return str(val).strip().lower() in {"1", "true", "yes", "on"}


class ConfigArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reads default values from a JSON config file.

    Config keys are constructed from argument names by:
    1. Taking the long option name (--foo-bar)
    2. Removing the leading dashes
    3. Replacing hyphens with underscores

    Explicit flags override file values.

    Example:
        parser = ConfigArgumentParser(args=["--config", "run.json"])
        parser.add_config_argument("--t-steps", type=int)
        # Will read "t_steps" from run.json if set
    """

    log = logging.getLogger(__name__)

    def __init__(self, args: Sequence[str] | None = None, **kwargs: Any) -> None:
        """Initialize parser and load the config file named by ``--config``.

        Args:
            args: Command line arguments used to locate ``--config`` (default: sys.argv[1:])
            **kwargs: Keyword arguments passed to ArgumentParser

        Raises:
            ConfigError: If the config file cannot be read or is not a flat JSON object
        """
        if args is None:
            args = sys.argv[1:]

        dummy_parser = argparse.ArgumentParser(add_help=False)
        dummy_parser.add_argument("--config", type=Path, default=None)
        parser_args, _ = dummy_parser.parse_known_args(args)
        self._config_path: Path | None = parser_args.config
        self._config: dict[str, Any] = self._load(parser_args.config)
        self._used_keys: set[str] = set()
        super().__init__(**kwargs)
        super().add_argument("--config", type=Path, help="Flat JSON config file with default values.")

    @classmethod
    def _load(cls, path: Path | None) -> dict[str, Any]:
        if path is None:
            return {}
        try:
            content = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            cls.log.error("Could not read config file %s: %s", path, e)
            raise ConfigError(f"Could not read config file {path}: {e}")
        if not isinstance(content, dict):
            raise ConfigError(f"Config file {path} must contain a JSON object")
        nested = [key for key, value in content.items() if isinstance(value, (dict, list))]
        if nested:
            raise ConfigError(f"Config file {path} must be flat, nested values for {nested}")
        return content

    @property
    def config_values(self) -> dict[str, Any]:
        return dict(self._config)

    def unused_config_keys(self) -> list[str]:
        return sorted(set(self._config) - self._used_keys)

    def add_config_argument(
        self,
        *args: str,
        key: str | None = None,
        help: str | None = None,
        action: str | type[argparse.Action] | None = None,
        type: Callable[[str], Any] | None = None,
        **kwargs: Any,
    ) -> argparse.Action:
        """Add argument with config file support.

        Args:
            *args: Positional arguments for the argument (e.g., '-f', '--foo')
            key: Override config key name
            help: Help text for the argument
            action: Argument action (e.g., 'store_true', 'store_false')
            type: Type converter function
            **kwargs: Additional keyword arguments passed to ArgumentParser.add_argument

        Returns:
            The created Action object
        """
        # Guess key if not specified (from --foo-bar → foo_bar)
        if key is None and args:
            for arg in args:
                if arg.startswith("--"):
                    key = arg[2:].replace("-", "_")
                    break

        action_ = action or kwargs.get("action", None)
        type_ = type or kwargs.get("type", None)
        if key is not None and key in self._config:
            self._used_keys.add(key)
            value = self._config[key]
            if "required" in kwargs and kwargs["required"]:
                kwargs["required"] = False

            if action_ == "store_true":
                kwargs["default"] = str2bool(value)
            elif action_ == "store_false":
                kwargs["default"] = not str2bool(value)
            elif type_ is not None and value is not None:
                try:
                    kwargs["default"] = type_(value if isinstance(value, str) else str(value))
                except Exception as e:
                    self.log.warning(
                        "Ignore config value %s. Could not convert %s=%r to %s: %s", key, key, value, type_, e
                    )
            else:
                kwargs["default"] = value

        help_text = help or ""
        if key:
            if help_text:
                help_text += " "
            help_text += f"[config: {key}]"

        super_kwargs = dict(kwargs)
        if help_text:
            super_kwargs["help"] = help_text
        if action is not None:
            super_kwargs["action"] = action
        if type is not None:
            super_kwargs["type"] = type

        return super().add_argument(*args, **super_kwargs)

    def error(self, message: str) -> NoReturn:  # type: ignore[override]
        """Raise instead of exiting so callers map usage errors to their own exit code."""
        self.log.error("Invalid arguments: %s", message)
        raise ConfigError(message)
