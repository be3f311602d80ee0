"""Effectively localized electron density, its atomic populations and group sums."""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from utils.constants import DEGRADED_FALLBACK_FRACTION, NEGLIGIBLE_DENSITY
from .diagnostics import DiagnosticSeries
from .effective_hole import (
    HoleBatch,
    HoleSolution,
    HoleStatus,
    br_curvature_arrays,
    dump_holes_csv,
    solve_holes_batch,
)
from .errors import InvariantViolation, SchemaError, UnknownAtomIndex
from .field_evaluator import (
    FieldBatch,
    FieldSample,
    dump_fields_csv,
    eval_all_fields,
    eval_fields_batch,
    load_exchange_csv,
)
from .molecular_grid import GridSettings, MolecularGrid, basin_integrals, build_grid
from .wavefunction import WavefunctionData

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ApeleOptions:
    threads: int = 1
    exchange_path: Optional[str] = None  # precomputed e_X instead of the integral route
    field_dump_path: Optional[str] = None
    hole_dump_path: Optional[str] = None


@dataclass
class ApeleReport:
    symbols: List[str]
    atom_populations: List[float]
    gross_ele: float
    group_populations: Dict[str, float] = field(default_factory=dict)
    q_r: Optional[float] = None
    q_r_group: Optional[str] = None
    provenance: Dict[str, Any] = field(default_factory=dict)
    degraded: bool = False

    def __post_init__(self):
        if len(self.symbols) != len(self.atom_populations):
            raise InvariantViolation(
                "One population per atom is required",
                atoms=len(self.symbols), populations=len(self.atom_populations),
            )

    @property
    def n_atoms(self) -> int:
        return len(self.atom_populations)

    def atom_labels(self) -> List[str]:
        """Element symbol plus 1-based position, e.g. C1, H3."""
        return [f"{symbol}{i + 1}" for i, symbol in enumerate(self.symbols)]


def ele_density_point(sample: FieldSample, holes: Sequence[HoleSolution]) -> float:
    """D_u = 2 sum over spins of rho_s (1 - n_eff_s) at one point."""
    total = 0.0
    for spin, hole in enumerate(holes):
        if sample.negligible(spin) or hole.status is HoleStatus.NEGLIGIBLE_DENSITY:
            continue
        total += sample.rho[spin] * (1.0 - hole.n_eff)
    return 2.0 * total


def ele_density_batch(rho: np.ndarray, holes: Sequence[HoleBatch]) -> np.ndarray:
    """Vectorized D_u from per-spin densities (2, n) and hole batches."""
    total = np.zeros(rho.shape[1])
    for spin, batch in enumerate(holes):
        significant = rho[spin] >= NEGLIGIBLE_DENSITY
        total += np.where(significant, rho[spin] * (1.0 - batch.n_eff), 0.0)
    return 2.0 * total


def solve_point_holes(fields: FieldBatch) -> Tuple[List[HoleBatch], np.ndarray, np.ndarray]:
    """Relaxed holes for both spins.

    Returns the hole batches with the curvature and u_exact arrays they were
    solved from, each shaped (2, n).
    """
    if fields.ex_density is None:
        raise InvariantViolation("Exchange energy density is required for hole relaxation")
    q = np.empty_like(fields.rho)
    u_exact = np.empty_like(fields.rho)
    holes = []
    for spin in range(2):
        rho = fields.rho[spin]
        q[spin], _ = br_curvature_arrays(rho, fields.grad_rho[spin], fields.lap_rho[spin], fields.tau[spin])
        with np.errstate(divide="ignore", invalid="ignore"):
            u_exact[spin] = np.where(rho > 0.0, 2.0 * fields.ex_density[spin] / np.where(rho > 0.0, rho, 1.0), 0.0)
        holes.append(solve_holes_batch(rho, q[spin], u_exact[spin]))
    return holes, q, u_exact


def _status_histogram(holes: Sequence[HoleBatch]) -> Dict[str, int]:
    histogram = {status.value: 0 for status in HoleStatus}
    for batch in holes:
        for name, count in batch.status_counts().items():
            histogram[name] += count
    return histogram


def _fallback_fraction(fields: FieldBatch, holes: Sequence[HoleBatch]) -> float:
    significant = 0
    fallbacks = 0
    fallback_code = list(HoleStatus).index(HoleStatus.FALLBACK)
    for spin, batch in enumerate(holes):
        mask = fields.rho[spin] >= NEGLIGIBLE_DENSITY
        significant += int(np.count_nonzero(mask))
        fallbacks += int(np.count_nonzero(batch.status[mask] == fallback_code))
    return fallbacks / significant if significant else 0.0


def _evaluate_fields(wfn: WavefunctionData, grid: MolecularGrid, options: ApeleOptions) -> FieldBatch:
    if options.exchange_path:
        fields = eval_fields_batch(wfn, grid.points, options.threads)
        return fields.with_exchange(load_exchange_csv(options.exchange_path, grid.points))
    return eval_all_fields(wfn, grid.points, options.threads)


def compute_apele(
    wfn: WavefunctionData,
    settings: GridSettings = GridSettings(),
    options: ApeleOptions = ApeleOptions(),
) -> ApeleReport:
    """Atomic populations of effectively localized electrons and their total."""
    grid = build_grid(wfn.nuclei, settings, options.threads)
    fields = _evaluate_fields(wfn, grid, options)
    holes, q, u_exact = solve_point_holes(fields)
    ele = ele_density_batch(fields.rho, holes)

    if not np.all(np.isfinite(ele)):
        point = int(np.flatnonzero(~np.isfinite(ele))[0])
        raise InvariantViolation("Non-finite ELE density", point=point, x=grid.points[point].tolist())

    populations = basin_integrals(grid, ele)
    gross = math.fsum(populations)
    electrons = math.fsum(basin_integrals(grid, fields.rho.sum(axis=0)))

    fraction = _fallback_fraction(fields, holes)
    degraded = fraction > DEGRADED_FALLBACK_FRACTION
    histogram = _status_histogram(holes)

    if options.field_dump_path:
        dump_fields_csv(options.field_dump_path, grid.points, fields)
    if options.hole_dump_path:
        dump_holes_csv(options.hole_dump_path, fields.rho, q, u_exact, holes)

    provenance = {
        "wfx": wfn.source,
        "title": wfn.title,
        "grid": settings.label(),
        "becke_iterations": settings.becke_iterations,
        "size_adjustment": settings.size_adjustment,
        "points": len(grid),
        "integrated_electrons": electrons,
        "exchange": options.exchange_path or "computed",
        "hole_statuses": histogram,
        "fallback_fraction": fraction,
        "orbitals": "ingested as given; absolute values depend on the level of theory",
    }
    if degraded:
        logger.warning(
            "Report degraded: %.2f%% of significant points fell back to N = 1", 100.0 * fraction
        )
    logger.info("Gross ELE %.6f over %d atoms (statuses %s)", gross, len(populations), histogram)
    return ApeleReport(
        symbols=list(wfn.symbols),
        atom_populations=populations,
        gross_ele=gross,
        provenance=provenance,
        degraded=degraded,
    )


def parse_group_definitions(definitions: Sequence[str]) -> Dict[str, List[int]]:
    """Parse ``NAME=idx1,idx2`` strings; indices are 1-based and returned 0-based."""
    groups: Dict[str, List[int]] = {}
    for definition in definitions:
        name, sep, members = definition.partition("=")
        name = name.strip()
        if not sep or not name:
            raise SchemaError("Group must be written NAME=idx1,idx2,...", group=definition)
        indices = []
        for token in members.split(","):
            token = token.strip()
            if not token:
                continue
            try:
                indices.append(int(token) - 1)
            except ValueError:
                raise SchemaError("Group member is not an integer", group=name, member=token) from None
        groups[name] = indices
    return groups


def group_apele(
    report: ApeleReport,
    groups: Mapping[str, Sequence[int]],
    designated: Optional[str] = None,
) -> ApeleReport:
    """Sum atomic populations over named atom sets (0-based indices).

    ``designated`` names the group whose concentration index
    Q_r = 2 F_r(group) / N_u is reported.
    """
    totals: Dict[str, float] = dict(report.group_populations)
    seen: Dict[int, str] = {}
    for name, members in groups.items():
        for index in members:
            if not 0 <= index < report.n_atoms:
                raise UnknownAtomIndex("Group refers to a missing atom", group=name, atom=index + 1)
            if index in seen and seen[index] != name:
                logger.warning("Atom %d belongs to groups %s and %s", index + 1, seen[index], name)
            seen[index] = name
        totals[name] = math.fsum(report.atom_populations[i] for i in members)

    q_r = report.q_r
    if designated is not None:
        if designated not in totals:
            raise SchemaError("Designated group is not defined", group=designated)
        if report.gross_ele > 0.0:
            q_r = 2.0 * totals[designated] / report.gross_ele
        else:
            logger.warning("Gross ELE is zero; Q_r left undefined")
            q_r = None
    return replace(report, group_populations=totals, q_r=q_r, q_r_group=designated or report.q_r_group)


def report_delta(before: ApeleReport, after: ApeleReport) -> List[float]:
    """Per-atom population change after - before for the same atom ordering."""
    if before.n_atoms != after.n_atoms:
        raise InvariantViolation("Reports differ in atom count", before=before.n_atoms, after=after.n_atoms)
    for i, (a, b) in enumerate(zip(before.symbols, after.symbols)):
        if a != b:
            raise InvariantViolation("Reports differ in element order", atom=i + 1, before=a, after=b)
    return [b - a for a, b in zip(before.atom_populations, after.atom_populations)]


def stretch_series(
    reports: Sequence[ApeleReport], tags: Sequence[str], atom: int = 0
) -> Tuple[DiagnosticSeries, DiagnosticSeries]:
    """APELE of one atom and the gross ELE count along a geometry scan."""
    if len(reports) != len(tags):
        raise SchemaError("One tag per report is required", reports=len(reports), tags=len(tags))
    for report in reports:
        if not 0 <= atom < report.n_atoms:
            raise UnknownAtomIndex("Atom missing from report", atom=atom + 1, atoms=report.n_atoms)
    label = reports[0].atom_labels()[atom] if reports else str(atom + 1)
    atom_series = DiagnosticSeries.from_values(
        f"APELE[{label}]", tags, [r.atom_populations[atom] for r in reports]
    )
    gross_series = DiagnosticSeries.from_values("N_u", tags, [r.gross_ele for r in reports])
    return atom_series, gross_series


