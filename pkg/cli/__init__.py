"""Command-line layer: argument parsing, run configuration and subcommands."""

from .commands import COMMANDS
from .config import RunConfig, config_from_args
from .parser import build_parser, parse_args

__all__ = ["COMMANDS", "RunConfig", "build_parser", "config_from_args", "parse_args"]
