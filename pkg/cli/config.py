"""Run configuration: flags, optionally preloaded from a flat key = value file."""

import configparser
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from core.errors import MissingFile, SchemaError
from core.molecular_grid import GridSettings
from utils.constants import (
    BECKE_ITERATIONS,
    MIN_RADIAL_POINTS,
    SUPPORTED_LEBEDEV_ORDERS,
)

# Keys holding several whitespace-separated values in a config file
LIST_KEYS = {"wfx", "tag", "groups", "regress", "pairs", "trend", "occupations"}
BOOLEAN_KEYS = {"size_adjustment", "raw_primitives", "verbose"}
CONFIG_SECTION = "run"


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    inputs: Tuple[str, ...] = ()
    tags: Tuple[str, ...] = ()
    grid: GridSettings = GridSettings()
    groups: Tuple[str, ...] = ()
    qr_group: Optional[str] = None
    output_format: str = "json"
    output_path: Optional[str] = None
    threads: int = 1
    raw_primitives: bool = False
    exchange_path: Optional[str] = None
    dump_wfx: Optional[str] = None
    dump_fields: Optional[str] = None
    dump_holes: Optional[str] = None
    atom_csv: Optional[str] = None
    series_out: Optional[str] = None
    series_atom: int = 1
    # diag
    amplitudes: Optional[str] = None
    n_correlated: Optional[int] = None
    energies: Optional[str] = None
    occupations: Optional[Tuple[float, float]] = None
    overlap: Optional[float] = None
    element_class: str = "organic"
    # corr
    series_csv: Optional[str] = None
    regress: Tuple[str, ...] = ()
    trend: Tuple[str, ...] = ()
    pairs: Tuple[str, ...] = ()
    # delta
    before: Optional[str] = None
    after: Optional[str] = None

    def input_files(self) -> List[str]:
        """Every file the subcommand will read."""
        files = list(self.inputs)
        for path in (self.exchange_path, self.amplitudes, self.energies, self.series_csv, self.before, self.after):
            if path:
                files.append(path)
        return files


def parse_grid(text: str) -> Tuple[int, int]:
    """``128x302`` -> (128, 302), checked against the supported ranges."""
    radial, sep, angular = text.lower().partition("x")
    try:
        n_radial, n_angular = int(radial), int(angular)
    except ValueError:
        raise SchemaError("Grid must be written RADIALxANGULAR", grid=text) from None
    if not sep or n_radial < MIN_RADIAL_POINTS:
        raise SchemaError("Too few radial points", grid=text, minimum=MIN_RADIAL_POINTS)
    if n_angular not in SUPPORTED_LEBEDEV_ORDERS:
        raise SchemaError(
            "Unsupported angular order", grid=text,
            supported=",".join(str(n) for n in SUPPORTED_LEBEDEV_ORDERS),
        )
    return n_radial, n_angular


def grid_settings(grid: str, becke_k: int = BECKE_ITERATIONS, size_adjustment: bool = False) -> GridSettings:
    n_radial, n_angular = parse_grid(grid)
    if becke_k < 1:
        raise SchemaError("Becke iteration count must be positive", becke_k=becke_k)
    return GridSettings(n_radial, n_angular, becke_k, size_adjustment)


def resolve_threads(threads: int) -> int:
    """0 means one worker per CPU."""
    if threads < 0:
        raise SchemaError("Thread count must not be negative", threads=threads)
    return threads or (os.cpu_count() or 1)


def load_config_file(path: str) -> Dict[str, object]:
    """Flat ``key = value`` file; keys use flag names with dashes or underscores."""
    if not os.path.isfile(path):
        raise MissingFile("Config file not found", path=path)
    parser = configparser.ConfigParser(interpolation=None)
    with open(path, "r") as f:
        text = f.read()
    try:
        parser.read_string(f"[{CONFIG_SECTION}]\n{text}", source=path)
    except configparser.Error as e:
        raise SchemaError("Malformed config file", path=path, detail=str(e).splitlines()[0]) from None

    values: Dict[str, object] = {}
    for key, raw in parser.items(CONFIG_SECTION):
        dest = key.strip().replace("-", "_")
        if dest in BOOLEAN_KEYS:
            try:
                values[dest] = parser.getboolean(CONFIG_SECTION, key)
            except ValueError:
                raise SchemaError("Expected a boolean", path=path, key=key) from None
        elif dest in LIST_KEYS:
            values[dest] = raw.split()
        else:
            values[dest] = raw.strip()
    return values


def config_from_args(args) -> RunConfig:
    """Assemble a RunConfig from parsed command-line arguments."""
    def get(name: str, default=None):
        return getattr(args, name, default)

    grid = GridSettings()
    if get("grid") is not None:
        grid = grid_settings(get("grid"), int(get("becke_k", BECKE_ITERATIONS)), bool(get("size_adjustment", False)))

    inputs = tuple(get("wfx") or ())
    tags = tuple(get("tag") or ())
    if tags and len(tags) != len(inputs):
        raise SchemaError("One --tag per --wfx input is required", inputs=len(inputs), tags=len(tags))

    occupations = get("occupations")
    return RunConfig(
        subcommand=args.command,
        inputs=inputs,
        tags=tags,
        grid=grid,
        groups=tuple(get("groups") or ()),
        qr_group=get("qr_group"),
        output_format=get("format", "json") or "json",
        output_path=get("output"),
        threads=resolve_threads(int(get("threads", 1) or 0)),
        raw_primitives=bool(get("raw_primitives", False)),
        exchange_path=get("exchange_csv"),
        dump_wfx=get("dump_wfx"),
        dump_fields=get("dump_fields"),
        dump_holes=get("dump_holes"),
        atom_csv=get("atom_csv"),
        series_out=get("series_out"),
        series_atom=int(get("series_atom", 1) or 1),
        amplitudes=get("amplitudes"),
        n_correlated=get("n_correlated"),
        energies=get("energies"),
        occupations=tuple(float(v) for v in occupations) if occupations else None,
        overlap=get("overlap"),
        element_class=get("element_class", "organic") or "organic",
        series_csv=get("series"),
        regress=tuple(get("regress") or ()),
        trend=tuple(get("trend") or ()),
        pairs=tuple(get("pairs") or ()),
        before=get("before"),
        after=get("after"),
    )
