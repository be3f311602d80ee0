"""Per-spin density fields and the exact-exchange energy density at points."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from utils.constants import (
    NEGLIGIBLE_DENSITY,
    PAIR_EXTENT_THRESHOLD,
    PAIR_SCREENING_THRESHOLD,
    POINT_CHUNK_SIZE,
)
from .errors import LengthMismatch, SchemaError
from .gaussian_integrals import PrimitivePair
from .wavefunction import WavefunctionData

logger = logging.getLogger(__name__)

SPINS = ("alpha", "beta")


@dataclass(frozen=True)
class FieldSample:
    """Fields at one point; every attribute is indexed by spin (0 alpha, 1 beta)."""

    rho: Tuple[float, float]
    grad_rho: Tuple[Tuple[float, float, float], Tuple[float, float, float]]
    lap_rho: Tuple[float, float]
    tau: Tuple[float, float]
    ex_density: Optional[Tuple[float, float]] = None

    def negligible(self, spin: int) -> bool:
        return self.rho[spin] < NEGLIGIBLE_DENSITY


@dataclass(frozen=True, eq=False)
class FieldBatch:
    """Fields at many points. Shapes: rho/lap/tau/ex (2, n), grad (2, n, 3)."""

    rho: np.ndarray
    grad_rho: np.ndarray
    lap_rho: np.ndarray
    tau: np.ndarray
    ex_density: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.rho.shape[1]

    @property
    def negligible(self) -> np.ndarray:
        return self.rho < NEGLIGIBLE_DENSITY

    def sample(self, index: int) -> FieldSample:
        ex = None
        if self.ex_density is not None:
            ex = (float(self.ex_density[0, index]), float(self.ex_density[1, index]))
        return FieldSample(
            rho=(float(self.rho[0, index]), float(self.rho[1, index])),
            grad_rho=(
                tuple(float(g) for g in self.grad_rho[0, index]),
                tuple(float(g) for g in self.grad_rho[1, index]),
            ),
            lap_rho=(float(self.lap_rho[0, index]), float(self.lap_rho[1, index])),
            tau=(float(self.tau[0, index]), float(self.tau[1, index])),
            ex_density=ex,
        )

    def with_exchange(self, ex_density: np.ndarray) -> "FieldBatch":
        return FieldBatch(self.rho, self.grad_rho, self.lap_rho, self.tau, ex_density)


def _axis_factors(d: np.ndarray, power: int, alpha: float):
    """d^l with its first and second derivative prefactors, Gaussian factor excluded."""
    base = d ** power
    first = -2.0 * alpha * d ** (power + 1)
    second = -2.0 * alpha * (2 * power + 1) * base + 4.0 * alpha * alpha * d ** (power + 2)
    if power >= 1:
        first = first + power * d ** (power - 1)
    if power >= 2:
        second = second + power * (power - 1) * d ** (power - 2)
    return base, first, second


def primitive_values(wfn: WavefunctionData, points: np.ndarray):
    """Unnormalized primitive values, gradients and Laplacians.

    Returns arrays of shape (nprim, n), (nprim, n, 3) and (nprim, n).
    """
    n = len(points)
    n_prims = len(wfn.primitives)
    values = np.zeros((n_prims, n))
    grads = np.zeros((n_prims, n, 3))
    laps = np.zeros((n_prims, n))

    for p, (center, powers, alpha) in enumerate(
        zip(wfn.primitive_centers, wfn.primitive_powers, wfn.primitive_exponents)
    ):
        d = points - center
        gauss = np.exp(-alpha * np.einsum("ij,ij->i", d, d))
        fx, dx, ddx = _axis_factors(d[:, 0], powers[0], alpha)
        fy, dy, ddy = _axis_factors(d[:, 1], powers[1], alpha)
        fz, dz, ddz = _axis_factors(d[:, 2], powers[2], alpha)
        values[p] = fx * fy * fz * gauss
        grads[p, :, 0] = dx * fy * fz * gauss
        grads[p, :, 1] = fx * dy * fz * gauss
        grads[p, :, 2] = fx * fy * dz * gauss
        laps[p] = (ddx * fy * fz + fx * ddy * fz + fx * fy * ddz) * gauss
    return values, grads, laps


def _density_fields(wfn: WavefunctionData, points: np.ndarray) -> Tuple[FieldBatch, np.ndarray]:
    """Fields at the points plus the orbital values they were built from."""
    values, grads, laps = primitive_values(wfn, points)
    coeffs = wfn.coefficient_matrix
    phi = coeffs @ values
    dphi = np.einsum("ip,pnk->ink", coeffs, grads)
    lphi = coeffs @ laps

    occ = wfn.spin_occupations
    grad_sq = np.einsum("ink,ink->in", dphi, dphi)
    rho = occ @ (phi * phi)
    grad_rho = 2.0 * np.einsum("si,in,ink->snk", occ, phi, dphi)
    lap_rho = occ @ (2.0 * phi * lphi + 2.0 * grad_sq)
    tau = occ @ grad_sq
    return FieldBatch(np.maximum(rho, 0.0), grad_rho, lap_rho, np.maximum(tau, 0.0)), phi


def _chunks(n: int) -> List[slice]:
    return [slice(start, min(start + POINT_CHUNK_SIZE, n)) for start in range(0, n, POINT_CHUNK_SIZE)]


def _map_chunks(func, points: np.ndarray, threads: int) -> list:
    chunks = [points[s] for s in _chunks(len(points))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, chunks))
    return [func(chunk) for chunk in chunks]


def _concat(batches: Sequence[FieldBatch]) -> FieldBatch:
    ex = None
    if batches and batches[0].ex_density is not None:
        ex = np.concatenate([b.ex_density for b in batches], axis=1)
    return FieldBatch(
        np.concatenate([b.rho for b in batches], axis=1),
        np.concatenate([b.grad_rho for b in batches], axis=1),
        np.concatenate([b.lap_rho for b in batches], axis=1),
        np.concatenate([b.tau for b in batches], axis=1),
        ex,
    )


def eval_fields_batch(wfn: WavefunctionData, points: np.ndarray, threads: int = 1) -> FieldBatch:
    """Density, gradient, Laplacian and tau per spin at every point."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) == 0:
        empty = np.zeros((2, 0))
        return FieldBatch(empty, np.zeros((2, 0, 3)), empty, empty)
    return _concat(_map_chunks(lambda chunk: _density_fields(wfn, chunk)[0], points, threads))


def eval_fields(wfn: WavefunctionData, point: Sequence[float]) -> FieldSample:
    """Fields at a single point (exchange energy density omitted)."""
    return eval_fields_batch(wfn, np.asarray(point, dtype=float)[np.newaxis, :]).sample(0)


# ---------------------------------------------------------------------------
# Exact-exchange energy density
# ---------------------------------------------------------------------------

class ExchangePairTable:
    """Screened primitive pairs with their Hermite data; built once, read-only."""

    def __init__(self, wfn: WavefunctionData, threshold: float = PAIR_SCREENING_THRESHOLD):
        self.wfn = wfn
        coeffs = wfn.coefficient_matrix
        occupied = wfn.spin_occupations.max(axis=0) > 0.0
        weights = np.abs(coeffs[occupied]).max(axis=0) if np.any(occupied) else np.zeros(len(wfn.primitives))

        centers = wfn.primitive_centers
        powers = wfn.primitive_powers
        exponents = wfn.primitive_exponents
        self.pairs: List[Tuple[int, int, float, PrimitivePair]] = []
        skipped = 0
        for p in range(len(wfn.primitives)):
            for q in range(p, len(wfn.primitives)):
                pair = PrimitivePair(centers[p], powers[p], exponents[p], centers[q], powers[q], exponents[q])
                if pair.prefactor * weights[p] * weights[q] < threshold:
                    skipped += 1
                    continue
                self.pairs.append((p, q, 1.0 if p == q else 2.0, pair))
        logger.debug("Exchange pair table: %d kept, %d screened", len(self.pairs), skipped)

    def energy_density(self, points: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """e_X per spin, shape (2, n), from orbital values ``phi`` (norb, n)."""
        coeffs = self.wfn.coefficient_matrix
        occ = self.wfn.spin_occupations
        # F[s, p, n] = sum_i n_is phi_i(r) C_ip
        weights = np.einsum("si,in,ip->spn", occ, phi, coeffs)
        ex = np.zeros((2, len(points)))
        for p, q, factor, pair in self.pairs:
            products = weights[:, p, :] * weights[:, q, :]
            mask = np.abs(products).max(axis=0) > PAIR_EXTENT_THRESHOLD
            if not np.any(mask):
                continue
            potential = pair.potential(points[mask])
            ex[:, mask] += factor * products[:, mask] * potential[np.newaxis, :]
        return np.minimum(-0.5 * ex, 0.0)


def _fields_with_exchange(wfn: WavefunctionData, table: ExchangePairTable, points: np.ndarray) -> FieldBatch:
    batch, phi = _density_fields(wfn, points)
    return batch.with_exchange(table.energy_density(points, phi))


def exchange_energy_density_batch(
    wfn: WavefunctionData,
    points: np.ndarray,
    v_cache: Optional[ExchangePairTable] = None,
    threads: int = 1,
) -> np.ndarray:
    """Conventional exact-exchange energy density per spin, shape (2, n)."""
    table = v_cache or ExchangePairTable(wfn)
    points = np.atleast_2d(np.asarray(points, dtype=float))

    def chunk_exchange(chunk: np.ndarray) -> np.ndarray:
        values, _, _ = primitive_values(wfn, chunk)
        return table.energy_density(chunk, wfn.coefficient_matrix @ values)

    return np.concatenate(_map_chunks(chunk_exchange, points, threads), axis=1)


def exchange_energy_density(
    wfn: WavefunctionData,
    point: Sequence[float],
    v_cache: Optional[ExchangePairTable] = None,
) -> Tuple[float, float]:
    """(e_X alpha, e_X beta) at a single point."""
    ex = exchange_energy_density_batch(wfn, np.asarray(point, dtype=float)[np.newaxis, :], v_cache)
    return float(ex[0, 0]), float(ex[1, 0])


def eval_all_fields(
    wfn: WavefunctionData,
    points: np.ndarray,
    threads: int = 1,
    v_cache: Optional[ExchangePairTable] = None,
) -> FieldBatch:
    """Density fields plus exchange energy density, evaluated chunk by chunk."""
    table = v_cache or ExchangePairTable(wfn)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return _concat(_map_chunks(lambda chunk: _fields_with_exchange(wfn, table, chunk), points, threads))


# ---------------------------------------------------------------------------
# CSV interfaces
# ---------------------------------------------------------------------------

EXCHANGE_COLUMNS = ["x", "y", "z", "e_x_alpha", "e_x_beta"]
COORDINATE_TOLERANCE = 1e-8


def load_exchange_csv(path: str, points: np.ndarray) -> np.ndarray:
    """Read precomputed e_X per spin for the given points, in order."""
    try:
        frame = pd.read_csv(path)
        numeric = frame[[c for c in EXCHANGE_COLUMNS if c in frame.columns]].astype(float)
    except ValueError:
        raise SchemaError("Exchange file must be a numeric CSV table", path=path) from None
    missing = [c for c in EXCHANGE_COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError("Exchange file lacks columns", path=path, missing=",".join(missing))
    if len(frame) != len(points):
        raise LengthMismatch("Exchange file row count differs from grid size", path=path, rows=len(frame), points=len(points))

    coords = numeric[["x", "y", "z"]].to_numpy(dtype=float)
    offsets = np.abs(coords - points).max(axis=1)
    if np.any(offsets > COORDINATE_TOLERANCE):
        row = int(np.argmax(offsets > COORDINATE_TOLERANCE))
        raise SchemaError("Exchange file point does not match grid point", path=path, row=row + 2)

    ex = numeric[["e_x_alpha", "e_x_beta"]].to_numpy(dtype=float).T
    if np.any(ex > 0.0):
        raise SchemaError("Exchange energy density must be non-positive", path=path)
    logger.info("Loaded exchange energy density for %d points from %s", len(points), path)
    return ex


def dump_fields_csv(path: str, points: np.ndarray, batch: FieldBatch) -> None:
    """Per-point field dump, one row per point and spin-resolved columns."""
    columns = {"x": points[:, 0], "y": points[:, 1], "z": points[:, 2]}
    for s, spin in enumerate(SPINS):
        columns[f"rho_{spin}"] = batch.rho[s]
        for k, axis in enumerate("xyz"):
            columns[f"grad_{axis}_{spin}"] = batch.grad_rho[s, :, k]
        columns[f"lap_{spin}"] = batch.lap_rho[s]
        columns[f"tau_{spin}"] = batch.tau[s]
        if batch.ex_density is not None:
            columns[f"e_x_{spin}"] = batch.ex_density[s]
    pd.DataFrame(columns).to_csv(path, index=False, float_format="%.17g")
    logger.info("Wrote field dump to %s", path)
