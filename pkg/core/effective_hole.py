"""Becke-Roussel model exchange hole with its normalization relaxed against the
exact-exchange energy density.

Per point and spin the hole is fixed by three conditions: the on-top depth
N a^3 e^-x = 8 pi rho, the curvature Q = rho a^2 (x - 2) / (6 x) and, in the
relaxed form, the potential at the reference electron u_model = u_exact.
Everything is solved for x = a b by a one-dimensional root search.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Sequence, Tuple

import numpy as np
import pandas as pd

from utils.constants import (
    BRACKET_EPSILON,
    BRACKET_SPAN,
    FLAT_CURVATURE,
    NEGLIGIBLE_DENSITY,
)
from .errors import NegligibleDensity, NoBracket, NonPositiveDensity, OutOfRange
from .field_evaluator import SPINS, FieldSample
from .root_finding import safeguarded_newton

logger = logging.getLogger(__name__)

BR_CONSTANT = 2.0 / 3.0 * math.pi ** (2.0 / 3.0)
LOG_BR_CONSTANT = math.log(BR_CONSTANT)


class HoleStatus(str, Enum):
    CONVERGED = "converged"
    CLAMPED_TO_ONE = "clamped_to_one"
    NEGLIGIBLE_DENSITY = "negligible_density"
    FALLBACK = "fallback"


# Integer codes used in HoleBatch.status are positions in this tuple
STATUS_CODES: Tuple[HoleStatus, ...] = tuple(HoleStatus)
_CONVERGED, _CLAMPED, _NEGLIGIBLE, _FALLBACK = range(len(STATUS_CODES))


@dataclass(frozen=True)
class HoleSolution:
    a: float
    b: float
    x: float
    n_eff: float
    u_model: float
    status: HoleStatus


@dataclass(frozen=True, eq=False)
class HoleBatch:
    """Hole parameters for many points of one spin; ``status`` holds integer codes."""

    a: np.ndarray
    b: np.ndarray
    x: np.ndarray
    n_eff: np.ndarray
    u_model: np.ndarray
    status: np.ndarray

    def __len__(self) -> int:
        return len(self.n_eff)

    def solution(self, index: int) -> HoleSolution:
        return HoleSolution(
            a=float(self.a[index]),
            b=float(self.b[index]),
            x=float(self.x[index]),
            n_eff=float(self.n_eff[index]),
            u_model=float(self.u_model[index]),
            status=STATUS_CODES[int(self.status[index])],
        )

    def status_counts(self) -> Dict[str, int]:
        counts = np.bincount(self.status, minlength=len(STATUS_CODES))
        return {status.value: int(count) for status, count in zip(STATUS_CODES, counts)}


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

def br_curvature(sample: FieldSample, spin: int) -> Tuple[float, float]:
    """(Q, dcurv) of one spin channel at a sampled point."""
    if sample.negligible(spin):
        raise NegligibleDensity("Spin density below cutoff", spin=SPINS[spin], rho=sample.rho[spin])
    q, dcurv = br_curvature_arrays(
        np.array([sample.rho[spin]]),
        np.array([sample.grad_rho[spin]]),
        np.array([sample.lap_rho[spin]]),
        np.array([sample.tau[spin]]),
    )
    return float(q[0]), float(dcurv[0])


def br_curvature_arrays(
    rho: np.ndarray, grad_rho: np.ndarray, lap_rho: np.ndarray, tau: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized curvature; points with zero density get dcurv = tau."""
    grad_sq = np.einsum("nk,nk->n", grad_rho, grad_rho)
    safe_rho = np.where(rho > 0.0, rho, 1.0)
    weizsacker = np.where(rho > 0.0, grad_sq / (4.0 * safe_rho), 0.0)
    # Rounding can push the von Weizsacker bound slightly above tau
    dcurv = np.maximum(tau - weizsacker, 0.0)
    return (lap_rho - 2.0 * dcurv) / 6.0, dcurv


# ---------------------------------------------------------------------------
# Closed-form pieces
# ---------------------------------------------------------------------------

def _g_factor(x: np.ndarray) -> np.ndarray:
    """1 - e^-x (1 + x/2), accurate for small x."""
    return -np.expm1(-x) - 0.5 * x * np.exp(-x)


def _hole_from_x(rho: np.ndarray, x: np.ndarray, n: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """a, b and u_model from the on-top condition at fixed x and N."""
    a = np.cbrt(8.0 * math.pi * rho * np.exp(x) / n)
    b = x / a
    return a, b, -n * _g_factor(x) / b


def _bracket(q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    lo = np.where(q > 0.0, 2.0 + BRACKET_EPSILON, BRACKET_EPSILON)
    hi = np.where(q > 0.0, 2.0 + BRACKET_SPAN, 2.0 - BRACKET_EPSILON)
    return lo, hi


def _solve_br_x(rho: np.ndarray, q: np.ndarray, n: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """x from x e^(-2x/3) / (x - 2) = C rho^(5/3) / (Q N^(2/3)), in log form.

    Returns (x, bracketed); flat curvature gives the x = 2 limit.
    """
    x = np.full(len(rho), 2.0)
    bracketed = np.ones(len(rho), dtype=bool)
    curved = np.abs(q) >= FLAT_CURVATURE
    if not np.any(curved):
        return x, bracketed

    rho_c, q_c, n_c = rho[curved], q[curved], n[curved]
    log_rhs = LOG_BR_CONSTANT + 5.0 / 3.0 * np.log(rho_c) - np.log(np.abs(q_c)) - 2.0 / 3.0 * np.log(n_c)

    def equation(t: np.ndarray):
        value = np.log(t) - 2.0 * t / 3.0 - np.log(np.abs(t - 2.0)) - log_rhs
        slope = 1.0 / t - 2.0 / 3.0 - 1.0 / (t - 2.0)
        return value, slope

    lo, hi = _bracket(q_c)
    result = safeguarded_newton(equation, lo, hi)
    x[curved] = result.root
    bracketed[curved] = result.bracketed
    return x, bracketed


def _relaxed_x(rho: np.ndarray, q: np.ndarray, u_exact: np.ndarray):
    """Solve u_model(x, N(x)) = u_exact with a and N slaved to x.

    Works with ln|u_model| = 1.5 ln N^(2/3) + ln a + ln G(x) - ln x. G is
    concave with G(0) = 0, so G'/G <= 1/x and the slope below is at most -1
    on (0, 2) and positive beyond 2: one root per bracket. Returns
    (x, n, bracketed).
    """
    log_rho = np.log(rho)
    log_q = np.log(np.abs(q))
    log_c = LOG_BR_CONSTANT + 5.0 / 3.0 * log_rho - log_q
    log_target = np.log(-u_exact)

    def log_n23(t: np.ndarray) -> np.ndarray:
        return log_c + np.log(np.abs(t - 2.0)) + 2.0 * t / 3.0 - np.log(t)

    def equation(t: np.ndarray):
        log_a = 0.5 * (math.log(6.0) + np.log(t) + log_q - log_rho - np.log(np.abs(t - 2.0)))
        g = _g_factor(t)
        value = 1.5 * log_n23(t) + log_a + np.log(g) - np.log(t) - log_target
        dg = 0.5 * np.exp(-t) * (1.0 + t)
        slope = 1.0 / (t - 2.0) + 1.0 - 2.0 / t + dg / g
        return value, slope

    lo, hi = _bracket(q)
    result = safeguarded_newton(equation, lo, hi)
    with np.errstate(over="ignore"):
        n = np.exp(1.5 * log_n23(result.root))
    return result.root, n, result.bracketed


def _relaxed_flat(rho: np.ndarray, u_exact: np.ndarray) -> np.ndarray:
    """N at the x = 2 limit from the on-top and potential conditions."""
    g2 = float(_g_factor(np.array(2.0)))
    a = np.sqrt(4.0 * math.pi * rho * g2 * math.e ** 2 / -u_exact)
    return 2.0 * -u_exact / (g2 * a)


# ---------------------------------------------------------------------------
# Public solvers
# ---------------------------------------------------------------------------

def solve_holes_batch(rho, q, u_exact) -> HoleBatch:
    """Relaxed hole of one spin at many points.

    Points below the density cutoff are marked negligible with n_eff = 1.
    Relaxed normalizations above 1 are replaced by the standard N = 1 hole
    (clamped_to_one); points without a usable target or bracket fall back to
    the N = 1 hole (fallback).
    """
    rho = np.asarray(rho, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    u_exact = np.asarray(u_exact, dtype=float).reshape(-1)
    size = len(rho)

    a = np.zeros(size)
    b = np.zeros(size)
    x = np.zeros(size)
    n_eff = np.ones(size)
    u_model = np.zeros(size)
    status = np.full(size, _CONVERGED, dtype=np.int64)

    negligible = ~(rho >= NEGLIGIBLE_DENSITY)
    status[negligible] = _NEGLIGIBLE
    usable = ~negligible & np.isfinite(q) & np.isfinite(u_exact) & (u_exact < 0.0)
    status[~negligible & ~usable] = _FALLBACK

    flat = usable & (np.abs(q) < FLAT_CURVATURE)
    curved = usable & ~flat

    with np.errstate(all="ignore"):
        if np.any(curved):
            idx = np.flatnonzero(curved)
            xs, ns, bracketed = _relaxed_x(rho[idx], q[idx], u_exact[idx])
            status[idx[~bracketed]] = _FALLBACK
            ok = bracketed & (ns <= 1.0)
            status[idx[bracketed & ~ok]] = _CLAMPED
            good = idx[ok]
            x[good] = xs[ok]
            n_eff[good] = ns[ok]

        if np.any(flat):
            idx = np.flatnonzero(flat)
            ns = _relaxed_flat(rho[idx], u_exact[idx])
            status[idx[ns > 1.0]] = _CLAMPED
            good = idx[ns <= 1.0]
            x[good] = 2.0
            n_eff[good] = ns[ns <= 1.0]

        relaxed = np.flatnonzero(status == _CONVERGED)
        if len(relaxed):
            a[relaxed], b[relaxed], u_model[relaxed] = _hole_from_x(rho[relaxed], x[relaxed], n_eff[relaxed])

        standard = np.flatnonzero(((status == _CLAMPED) | (status == _FALLBACK)) & ~negligible)
        if len(standard):
            q_standard = np.where(np.isfinite(q[standard]), q[standard], 0.0)
            ones = np.ones(len(standard))
            xs, bracketed = _solve_br_x(rho[standard], q_standard, ones)
            status[standard[~bracketed]] = _FALLBACK
            x[standard] = xs
            n_eff[standard] = 1.0
            a[standard], b[standard], u_model[standard] = _hole_from_x(rho[standard], xs, ones)

    batch = HoleBatch(a, b, x, n_eff, u_model, status)
    logger.debug("Hole solver statuses: %s", batch.status_counts())
    return batch


def solve_br(rho: float, q: float, n: float = 1.0) -> HoleSolution:
    """Standard Becke-Roussel hole with fixed normalization ``n``."""
    if not rho > 0.0:
        raise NonPositiveDensity("Density must be positive", rho=rho)
    if not 0.0 < n <= 1.0:
        raise OutOfRange("Normalization must lie in (0, 1]", n=n)
    if not math.isfinite(q):
        raise OutOfRange("Curvature must be finite", q=q)

    rho_arr, n_arr = np.array([rho], dtype=float), np.array([n], dtype=float)
    with np.errstate(all="ignore"):
        x, bracketed = _solve_br_x(rho_arr, np.array([q], dtype=float), n_arr)
    if not bracketed[0]:
        raise NoBracket("No sign change on the Becke-Roussel bracket", rho=rho, q=q, n=n)
    a, b, u = _hole_from_x(rho_arr, x, n_arr)
    return HoleSolution(float(a[0]), float(b[0]), float(x[0]), float(n), float(u[0]), HoleStatus.CONVERGED)


def relaxed_normalization(rho: float, q: float, u_exact: float) -> HoleSolution:
    """Hole whose normalization reproduces the exact-exchange potential ``u_exact``."""
    if not rho > 0.0:
        raise NonPositiveDensity("Density must be positive", rho=rho)
    if rho < NEGLIGIBLE_DENSITY:
        raise NegligibleDensity("Density below cutoff", rho=rho)
    if not (math.isfinite(u_exact) and u_exact < 0.0):
        raise OutOfRange("Exact hole potential must be finite and negative", u_exact=u_exact)
    solution = solve_holes_batch([rho], [q], [u_exact]).solution(0)
    if solution.status is HoleStatus.FALLBACK:
        logger.warning("Relaxed hole fell back to N = 1 (rho=%g, Q=%g, u=%g)", rho, q, u_exact)
    return solution


def spherical_hole(s, a: float, b: float, n: float = 1.0) -> np.ndarray:
    """Spherically averaged model hole at interelectronic distances ``s``."""
    s = np.asarray(s, dtype=float)
    near = a * np.abs(s - b)
    far = a * (s + b)
    bracket = (near + 1.0) * np.exp(-near) - (far + 1.0) * np.exp(-far)
    safe_s = np.where(s > 0.0, s, 1.0)
    value = -n * a / (16.0 * math.pi * b * safe_s) * bracket
    on_top = -n * a ** 3 * math.exp(-a * b) / (8.0 * math.pi)
    return np.where(s > 0.0, value, on_top)


def dump_holes_csv(
    path: str,
    rho: np.ndarray,
    q: np.ndarray,
    u_exact: np.ndarray,
    holes: Sequence[HoleBatch],
) -> None:
    """Debug dump: rho, Q, u_exact, x, n_eff and status per point and spin."""
    columns = {}
    for s, spin in enumerate(SPINS):
        columns[f"rho_{spin}"] = rho[s]
        columns[f"q_{spin}"] = q[s]
        columns[f"u_exact_{spin}"] = u_exact[s]
        columns[f"x_{spin}"] = holes[s].x
        columns[f"n_eff_{spin}"] = holes[s].n_eff
        columns[f"status_{spin}"] = [STATUS_CODES[c].value for c in holes[s].status]
    pd.DataFrame(columns).to_csv(path, index=False, float_format="%.17g")
    logger.info("Wrote hole dump to %s", path)
