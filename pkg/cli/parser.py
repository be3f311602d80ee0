"""Command-line surface of the toolkit."""

import argparse
import sys
from typing import Dict, List, Optional, Tuple

from utils.constants import (
    BECKE_ITERATIONS,
    DEFAULT_ANGULAR_POINTS,
    DEFAULT_RADIAL_POINTS,
    ELEMENT_CLASSES,
    EXIT_USAGE,
    OUTPUT_FORMATS,
)
from .config import load_config_file

DEFAULT_GRID = f"{DEFAULT_RADIAL_POINTS}x{DEFAULT_ANGULAR_POINTS}"
# Required flags are checked after config merging so a config file can supply them
REQUIRED_FLAGS = {
    "apele": ("wfx",),
    "corr": ("series",),
    "grid-dump": ("wfx", "output"),
    "delta": ("before", "after"),
}


class UsageExitParser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 64 on usage errors."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(parser: argparse.ArgumentParser, output_help: str) -> None:
    parser.add_argument("--format", choices=OUTPUT_FORMATS, default="json", help="Output format (default: json)")
    parser.add_argument("--output", "-o", help=output_help)
    parser.add_argument("--config", help="Flat key = value file supplying defaults for these flags")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging on stderr")


def _add_grid(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", default=DEFAULT_GRID, help=f"RADIALxANGULAR points per atom (default: {DEFAULT_GRID})")
    parser.add_argument("--becke-k", type=int, default=BECKE_ITERATIONS, help="Becke smoothing iterations")
    parser.add_argument("--size-adjustment", action="store_true", help="Bragg-Slater cell-size adjustment")
    parser.add_argument("--raw-primitives", action="store_true", help="Coefficients already include primitive normalization")


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    """Top-level parser plus the subcommand parsers keyed by name."""
    parser = UsageExitParser(
        prog="apele",
        description="Atomic populations of effectively localized electrons and nondynamic-correlation diagnostics",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    commands: Dict[str, argparse.ArgumentParser] = {}

    apele = subparsers.add_parser("apele", help="APELE report from .wfx wavefunctions")
    apele.add_argument("--wfx", nargs="+", metavar="PATH", help="Wavefunction file(s); '-' reads stdin")
    apele.add_argument("--tag", nargs="+", metavar="TAG", help="Series tag per input (e.g. bond distance)")
    _add_grid(apele)
    apele.add_argument("--groups", nargs="+", metavar="NAME=i,j", help="Atom groups, 1-based indices")
    apele.add_argument("--qr-group", metavar="NAME", help="Group whose Q_r concentration index is reported")
    apele.add_argument("--threads", type=int, default=1, help="Worker threads, 0 = one per CPU")
    apele.add_argument("--exchange-csv", metavar="PATH", help="Precomputed exchange energy density per grid point")
    apele.add_argument("--dump-wfx", metavar="PATH", help="Write the parsed wavefunction back as .wfx")
    apele.add_argument("--dump-fields", metavar="PATH", help="Per-point field dump (CSV)")
    apele.add_argument("--dump-holes", metavar="PATH", help="Per-point hole solver dump (CSV)")
    apele.add_argument("--atom-csv", metavar="PATH", help="Per-atom populations (CSV)")
    apele.add_argument("--series-out", metavar="PATH", help="APELE and N_u series over the inputs (CSV)")
    apele.add_argument("--series-atom", type=int, default=1, help="1-based atom for --series-out")
    _add_common(apele, "Report file, or a directory with several --wfx inputs (default: stdout)")
    commands["apele"] = apele

    diag = subparsers.add_parser("diag", help="T1, D1, %%TAE[(T)], A_lambda and y diagnostics")
    diag.add_argument("--amplitudes", metavar="PATH", help="Singles amplitudes (CSV matrix or JSON record)")
    diag.add_argument("--n-correlated", type=int, help="Correlated electrons for CSV amplitudes")
    diag.add_argument("--energies", metavar="PATH", help="Atomization energies (JSON)")
    diag.add_argument("--occupations", nargs=2, type=float, metavar=("N_HOMO", "N_LUMO"), help="Natural occupations")
    diag.add_argument("--overlap", type=float, help="HOMO-LUMO overlap T")
    diag.add_argument("--element-class", choices=ELEMENT_CLASSES, default="organic", help="Threshold class")
    _add_common(diag, "Output file (default: stdout)")
    commands["diag"] = diag

    corr = subparsers.add_parser("corr", help="Correlation matrix and regressions of diagnostic series")
    corr.add_argument("--series", metavar="PATH", help="CSV: tag column, one column per series")
    corr.add_argument("--regress", nargs="+", metavar="x=NAME|y=NAME", help="Regress y series on the x series")
    corr.add_argument("--trend", nargs=2, metavar=("A", "B"), help="Series compared for pairwise ordering")
    corr.add_argument("--pairs", nargs="+", metavar="TAG1:TAG2", help="Tag pairs for --trend")
    _add_common(corr, "Output file (default: stdout)")
    commands["corr"] = corr

    grid = subparsers.add_parser("grid-dump", help="Write the molecular grid of a wavefunction")
    grid.add_argument("--wfx", nargs=1, metavar="PATH", help="Wavefunction file")
    _add_grid(grid)
    grid.add_argument("--threads", type=int, default=1, help="Worker threads, 0 = one per CPU")
    _add_common(grid, "Grid CSV (required)")
    commands["grid-dump"] = grid

    delta = subparsers.add_parser("delta", help="Per-atom APELE change between two JSON reports")
    delta.add_argument("--before", metavar="PATH", help="Reference report (JSON)")
    delta.add_argument("--after", metavar="PATH", help="Compared report (JSON)")
    _add_common(delta, "Output file (default: stdout)")
    commands["delta"] = delta

    return parser, commands


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse flags; a --config file fills in whatever the flags leave unset."""
    parser, commands = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        values = load_config_file(args.config)
        sub = commands[args.command]
        known = {action.dest for action in sub._actions}
        unknown = sorted(set(values) - known)
        if unknown:
            sub.error(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**values)
        args = parser.parse_args(argv)

    missing = [name for name in REQUIRED_FLAGS.get(args.command, ()) if not getattr(args, name, None)]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        commands[args.command].error(f"the following arguments are required: {flags}")
    return args
