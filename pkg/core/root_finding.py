"""Safeguarded Newton-Raphson with bisection fallback, vectorized over elements."""

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from utils.constants import MAX_ROOT_ITERATIONS, ROOT_TOLERANCE

RootFunction = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass
class RootResult:
    root: np.ndarray
    bracketed: np.ndarray  # sign change found between the bracket ends
    converged: np.ndarray
    iterations: int


def safeguarded_newton(
    func: RootFunction,
    lo: np.ndarray,
    hi: np.ndarray,
    xtol: float = ROOT_TOLERANCE,
    ftol: float = ROOT_TOLERANCE,
    max_iter: int = MAX_ROOT_ITERATIONS,
) -> RootResult:
    """Find one root per element inside [lo, hi].

    ``func(x)`` returns ``(f, df)`` elementwise for an array ``x`` shaped like
    ``lo``. Newton steps that would leave the bracket, or that shrink it too
    slowly, are replaced by bisection. Elements without a sign change are
    reported unbracketed and returned at the bracket end with the smaller |f|.
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    with np.errstate(all="ignore"):
        f_lo, _ = func(lo)
        f_hi, _ = func(hi)

    bracketed = np.isfinite(f_lo) & np.isfinite(f_hi) & (np.sign(f_lo) * np.sign(f_hi) <= 0.0)
    xl = np.where(f_lo < 0.0, lo, hi)
    xh = np.where(f_lo < 0.0, hi, lo)
    x = 0.5 * (lo + hi)
    dx_old = np.abs(hi - lo)
    dx = dx_old.copy()

    with np.errstate(all="ignore"):
        f, df = func(x)

    done = ~bracketed
    at_lo = bracketed & (f_lo == 0.0)
    at_hi = bracketed & (f_hi == 0.0) & ~at_lo
    x = np.where(at_lo, lo, np.where(at_hi, hi, x))
    done |= at_lo | at_hi | (np.abs(f) <= ftol)
    converged = done & bracketed

    iterations = 0
    while iterations < max_iter and not np.all(done):
        iterations += 1
        active = ~done
        with np.errstate(all="ignore"):
            outside = ((x - xh) * df - f) * ((x - xl) * df - f) > 0.0
            slow = np.abs(2.0 * f) > np.abs(dx_old * df)
            bisect = outside | slow | ~np.isfinite(df) | (df == 0.0)

            step = np.where(bisect, 0.5 * (xh - xl), f / df)
            x_new = np.where(bisect, xl + step, x - step)

        dx_old = np.where(active, dx, dx_old)
        dx = np.where(active, step, dx)
        stalled = active & (x_new == x)
        x = np.where(active, x_new, x)

        with np.errstate(all="ignore"):
            f_new, df_new = func(x)
        f = np.where(active, f_new, f)
        df = np.where(active, df_new, df)

        move_low = active & (f < 0.0)
        xl = np.where(move_low, x, xl)
        xh = np.where(active & ~move_low, x, xh)

        finished = active & ((np.abs(dx) <= xtol) | (np.abs(f) <= ftol) | stalled)
        converged |= finished
        done |= finished

    unbracketed = ~bracketed
    x = np.where(unbracketed, np.where(np.abs(f_lo) <= np.abs(f_hi), lo, hi), x)
    return RootResult(root=x, bracketed=bracketed, converged=converged, iterations=iterations)
