"""Becke multicenter quadrature: radial x Lebedev atomic grids with fuzzy cells."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from utils.constants import (
    ANGSTROM_TO_BOHR,
    BECKE_ITERATIONS,
    BRAGG_RADII_ANGSTROM,
    DEFAULT_ANGULAR_POINTS,
    DEFAULT_RADIAL_POINTS,
    MIN_RADIAL_POINTS,
    SIZE_ADJUSTMENT_LIMIT,
)
from .errors import CoincidentNuclei, LengthMismatch, OutOfRange, UnknownElement, UnknownAtomIndex
from .lebedev import lebedev_rule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSettings:
    n_radial: int = DEFAULT_RADIAL_POINTS
    n_angular: int = DEFAULT_ANGULAR_POINTS
    becke_iterations: int = BECKE_ITERATIONS
    size_adjustment: bool = False

    def label(self) -> str:
        return f"{self.n_radial}x{self.n_angular}"


@dataclass(frozen=True, eq=False)
class MolecularGrid:
    points: np.ndarray  # (npts, 3), bohr
    quad_weights: np.ndarray  # (npts,), bohr^3
    owner_atom: np.ndarray  # (npts,)
    becke_weights: np.ndarray  # (npts,)
    settings: GridSettings
    n_atoms: int

    def __len__(self) -> int:
        return len(self.quad_weights)

    @property
    def total_weights(self) -> np.ndarray:
        return self.quad_weights * self.becke_weights

    def basin_indices(self, atom: int) -> np.ndarray:
        return np.flatnonzero(self.owner_atom == atom)


def bragg_radius(symbol: str) -> float:
    """Bragg-Slater radius in bohr."""
    if symbol not in BRAGG_RADII_ANGSTROM:
        raise UnknownElement("No Bragg-Slater radius tabulated", element=symbol)
    return BRAGG_RADII_ANGSTROM[symbol] * ANGSTROM_TO_BOHR


def _size_adjustments(radii: Sequence[float]) -> np.ndarray:
    """Pairwise a_AB of the cell-size adjustment, antisymmetric, clamped."""
    radii = np.asarray(radii, dtype=float)
    chi = radii[:, np.newaxis] / radii[np.newaxis, :]
    u = (chi - 1.0) / (chi + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(np.abs(u) > 0.0, u / (u * u - 1.0), 0.0)
    return np.clip(a, -SIZE_ADJUSTMENT_LIMIT, SIZE_ADJUSTMENT_LIMIT)


def becke_weight_matrix(
    points: np.ndarray,
    coords: np.ndarray,
    iterations: int = BECKE_ITERATIONS,
    radii: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Cell weights of every atom at every point, shape (n_atoms, npts).

    ``radii`` switches on the size adjustment.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    n_atoms = len(coords)
    cell = np.ones((n_atoms, len(points)))
    if n_atoms == 1:
        return cell

    dist = np.linalg.norm(points[np.newaxis, :, :] - coords[:, np.newaxis, :], axis=2)
    adjust = _size_adjustments(radii) if radii is not None else None

    for a in range(n_atoms):
        for b in range(a + 1, n_atoms):
            r_ab = float(np.linalg.norm(coords[a] - coords[b]))
            if r_ab == 0.0:
                raise CoincidentNuclei("Distinct atoms share a position", atom_a=a, atom_b=b)
            mu = (dist[a] - dist[b]) / r_ab
            if adjust is not None:
                mu = mu + adjust[a, b] * (1.0 - mu * mu)
            f = mu
            for _ in range(iterations):
                f = 0.5 * (3.0 * f - f ** 3)
            cell[a] *= 0.5 * (1.0 - f)
            cell[b] *= 0.5 * (1.0 + f)

    total = cell.sum(axis=0)
    nearest = np.argmin(dist, axis=0)
    empty = total <= 0.0
    if np.any(empty):
        # Every product underflowed; assign the point to its nearest nucleus
        cell[:, empty] = 0.0
        cell[nearest[empty], np.flatnonzero(empty)] = 1.0
        total = cell.sum(axis=0)
    return cell / total


def becke_weights(
    point: Sequence[float],
    geometry,
    k: int = BECKE_ITERATIONS,
    size_adjustment: bool = False,
) -> np.ndarray:
    """Normalized per-atom cell weight vector at a single point.

    ``geometry`` is a sequence of nuclei (anything with ``symbol`` and
    ``position``) or an (n, 3) coordinate array when no size adjustment is
    requested.
    """
    coords, radii = _geometry_arrays(geometry, size_adjustment)
    return becke_weight_matrix(np.asarray(point, dtype=float)[np.newaxis, :], coords, k, radii)[:, 0]


def _geometry_arrays(geometry, size_adjustment: bool) -> Tuple[np.ndarray, Optional[List[float]]]:
    if isinstance(geometry, np.ndarray):
        if size_adjustment:
            raise UnknownElement("Size adjustment needs element symbols")
        return geometry.reshape(-1, 3), None
    coords = np.array([n.position for n in geometry], dtype=float).reshape(-1, 3)
    radii = [bragg_radius(n.symbol) for n in geometry] if size_adjustment else None
    return coords, radii


def radial_grid(n_radial: int, r_m: float) -> Tuple[np.ndarray, np.ndarray]:
    """Becke-mapped Gauss-Chebyshev (second kind) radii and weights, r^2 included."""
    i = np.arange(1, n_radial + 1)
    theta = i * np.pi / (n_radial + 1)
    x = np.cos(theta)
    w = np.pi / (n_radial + 1) * np.sin(theta)
    r = r_m * (1.0 + x) / (1.0 - x)
    jacobian = 2.0 * r_m / (1.0 - x) ** 2
    return r, w * jacobian * r * r


def atomic_radius_scale(symbol: str) -> float:
    """R_m of the radial map: full Bragg radius for hydrogen, half otherwise."""
    radius = bragg_radius(symbol)
    return radius if symbol == "H" else 0.5 * radius


def build_grid(geometry, settings: GridSettings = GridSettings(), threads: int = 1) -> MolecularGrid:
    """Unpruned Becke grid over every nucleus of ``geometry``."""
    if settings.n_radial < MIN_RADIAL_POINTS:
        raise OutOfRange(
            "Too few radial points", n_radial=settings.n_radial, minimum=MIN_RADIAL_POINTS
        )
    directions, angular_weights = lebedev_rule(settings.n_angular)
    coords, radii = _geometry_arrays(list(geometry), settings.size_adjustment)
    scales = [atomic_radius_scale(n.symbol) for n in geometry]

    def atom_block(atom: int):
        r, radial_weights = radial_grid(settings.n_radial, scales[atom])
        pts = coords[atom] + (r[:, np.newaxis, np.newaxis] * directions[np.newaxis, :, :])
        pts = pts.reshape(-1, 3)
        weights = (radial_weights[:, np.newaxis] * 4.0 * np.pi * angular_weights[np.newaxis, :]).reshape(-1)
        cells = becke_weight_matrix(pts, coords, settings.becke_iterations, radii)[atom]
        return pts, weights, cells

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(atom_block, range(len(coords))))
    else:
        blocks = [atom_block(atom) for atom in range(len(coords))]

    points = np.vstack([b[0] for b in blocks])
    quad_weights = np.concatenate([b[1] for b in blocks])
    becke = np.concatenate([b[2] for b in blocks])
    owner = np.repeat(np.arange(len(coords)), settings.n_radial * settings.n_angular)
    for array in (points, quad_weights, becke, owner):
        array.setflags(write=False)

    logger.info(
        "Built %s grid: %d atoms, %d points, size adjustment %s",
        settings.label(), len(coords), len(points), "on" if settings.size_adjustment else "off",
    )
    return MolecularGrid(points, quad_weights, owner, becke, settings, len(coords))


def basin_integrals(grid: MolecularGrid, values: Sequence[float]) -> List[float]:
    """Compensated per-atom sums of quad_weight * becke_weight * value."""
    values = np.asarray(values, dtype=float).reshape(-1)
    if len(values) != len(grid):
        raise LengthMismatch("Value count differs from grid size", values=len(values), points=len(grid))
    products = grid.quad_weights * grid.becke_weights * values
    return [math.fsum(products[grid.basin_indices(atom)]) for atom in range(grid.n_atoms)]


def integrate(grid: MolecularGrid, values: Sequence[float], basin: Optional[int] = None) -> float:
    """Integrate per-point values over all space or one atomic basin.

    The full integral is the compensated sum of the basin sums in atom
    order, so basin results add up to it exactly.
    """
    if basin is not None and not 0 <= basin < grid.n_atoms:
        raise UnknownAtomIndex("Basin index out of range", basin=basin, atoms=grid.n_atoms)
    sums = basin_integrals(grid, values)
    if basin is not None:
        return sums[basin]
    return math.fsum(sums)


def dump_grid_csv(grid: MolecularGrid, path: str) -> None:
    """Write x, y, z, quad_weight, owner, becke_weight for every point."""
    frame = pd.DataFrame(
        {
            "x": grid.points[:, 0],
            "y": grid.points[:, 1],
            "z": grid.points[:, 2],
            "quad_weight": grid.quad_weights,
            "owner": grid.owner_atom,
            "becke_weight": grid.becke_weights,
        }
    )
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info("Wrote grid dump to %s", path)
