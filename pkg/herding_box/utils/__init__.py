"""Utilities for herding-box."""

from .config_argument_parser import ConfigArgumentParser
from .param_parser import ParamParser

__all__ = ["ConfigArgumentParser", "ParamParser"]
