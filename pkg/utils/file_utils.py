"""File and directory utility functions."""

import json
import os
from typing import Any

from core.errors import MissingFile, SchemaError


def create_directories(*dirs: str) -> None:
    """Create directories if they don't exist."""
    for directory in dirs:
        os.makedirs(directory, exist_ok=True)


def ensure_parent_dir(path: str) -> None:
    """Create the directory a file will be written into."""
    parent = os.path.dirname(os.path.abspath(path))
    create_directories(parent)


def require_files(*paths: str) -> None:
    """Raise MissingFile naming the first path that does not exist ("-" is stdin)."""
    for path in paths:
        if path and path != "-" and not os.path.isfile(path):
            raise MissingFile("Input file not found", path=path)


def read_json(path: str) -> Any:
    """Parse a JSON file; syntax and encoding errors become SchemaError."""
    require_files(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError("Invalid JSON", path=path, line=e.lineno) from None
    except UnicodeDecodeError:
        raise SchemaError("File is not UTF-8 text", path=path) from None


def output_path(directory: str, stem: str, extension: str) -> str:
    """Path of an output file named after its input."""
    name = os.path.splitext(os.path.basename(stem))[0]
    return os.path.join(directory, f"{name}.{extension.lstrip('.')}")
