#!/usr/bin/env python3
"""
Fixture Generator

Writes the built-in model wavefunctions (hydrogen atom, stretched H2 series,
H2 dimer, water-like and ethane-like molecules) as .wfx files.

Usage:
    python scripts/make_fixtures.py [output_directory] [--only NAME ...]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from core.model_systems import FIXTURES  # noqa: E402
from core.wavefunction import write_wfx  # noqa: E402
from utils.constants import DEFAULT_FIXTURES_DIR  # noqa: E402


def write_fixture(name, output_dir):
    """
    Build one fixture and write it as <output_dir>/<name>.wfx.

    Args:
        name (str): Key of FIXTURES
        output_dir (Path): Destination directory

    Returns:
        Path: Written file
    """
    wfn = FIXTURES[name]()
    path = output_dir / f"{name}.wfx"
    path.write_text(write_wfx(wfn))
    print(f"Wrote: {path} ({len(wfn.nuclei)} atoms, {len(wfn.primitives)} primitives)")
    return path


def main():
    parser = argparse.ArgumentParser(description="Write the model wavefunctions as .wfx fixtures")
    parser.add_argument(
        "output_dir", nargs="?", default=DEFAULT_FIXTURES_DIR,
        help=f"Output directory (default: {DEFAULT_FIXTURES_DIR})",
    )
    parser.add_argument("--only", nargs="+", choices=sorted(FIXTURES), help="Fixtures to write")
    args = parser.parse_args()

    output_dir = Path(args.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    names = args.only or list(FIXTURES)
    for name in names:
        write_fixture(name, output_dir)

    print(f"\nDone! Wrote {len(names)} fixtures to {output_dir}.")


if __name__ == "__main__":
    main()
