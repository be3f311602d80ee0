"""Cartesian Gaussian kernels: normalization, Hermite expansion, Boys function
and the electrostatic potential of a primitive product distribution."""

import math
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.special import erf, factorial2

from utils.constants import MAX_BOYS_ORDER, MAX_PRIMITIVE_TYPE
from .errors import OrderTooHigh, OutOfRange, UnsupportedPrimitiveType

# .wfx primitive type code -> Cartesian powers (l, m, n); index 0 is type 1
CARTESIAN_POWERS: Tuple[Tuple[int, int, int], ...] = (
    (0, 0, 0),
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
    (2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0), (1, 0, 1), (0, 1, 1),
    (3, 0, 0), (0, 3, 0), (0, 0, 3), (1, 2, 0), (2, 1, 0),
    (2, 0, 1), (1, 0, 2), (0, 1, 2), (0, 2, 1), (1, 1, 1),
)

# Above this argument the erf closed form plus upward recursion is used
BOYS_LARGE_T = 30.0
BOYS_SERIES_TERMS = 600


def cartesian_powers(type_code: int) -> Tuple[int, int, int]:
    """Map a .wfx type code to its Cartesian powers."""
    if not 1 <= type_code <= MAX_PRIMITIVE_TYPE:
        raise UnsupportedPrimitiveType("Unsupported primitive type", type_code=type_code)
    return CARTESIAN_POWERS[type_code - 1]


def primitive_norm(alpha: float, powers: Sequence[int]) -> float:
    """Normalization constant of x^l y^m z^n exp(-alpha r^2)."""
    total = sum(powers)
    double_factorials = 1
    for power in powers:
        # (-1)!! = 1
        if power > 0:
            double_factorials *= int(factorial2(2 * power - 1, exact=True))
    return (2.0 * alpha / math.pi) ** 0.75 * (4.0 * alpha) ** (total / 2.0) / math.sqrt(
        double_factorials
    )


def boys_array(m_max: int, t: np.ndarray) -> np.ndarray:
    """F_0..F_{m_max} at every t; shape (m_max + 1, *t.shape)."""
    if m_max > MAX_BOYS_ORDER:
        raise OrderTooHigh("Boys order too high", order=m_max, limit=MAX_BOYS_ORDER)
    if m_max < 0:
        raise OutOfRange("Boys order must be non-negative", order=m_max)

    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or not np.all(np.isfinite(t)):
        raise OutOfRange("Boys argument must be finite and non-negative")

    flat = t.reshape(-1)
    values = np.empty((m_max + 1, flat.size))
    exp_t = np.exp(-flat)
    large = flat >= max(BOYS_LARGE_T, 2.0 * m_max)
    small = ~large

    if np.any(small):
        ts = flat[small]
        es = exp_t[small]
        # Positive series for the top order, then stable downward recursion
        term = np.full(ts.shape, 1.0 / (2 * m_max + 1))
        total = term.copy()
        for k in range(1, BOYS_SERIES_TERMS):
            term = term * 2.0 * ts / (2 * m_max + 2 * k + 1)
            total += term
            if np.all(term <= 1e-17 * total):
                break
        top = es * total
        values[m_max, small] = top
        for m in range(m_max - 1, -1, -1):
            top = (2.0 * ts * top + es) / (2 * m + 1)
            values[m, small] = top

    if np.any(large):
        tl = flat[large]
        el = exp_t[large]
        current = 0.5 * np.sqrt(np.pi / tl) * erf(np.sqrt(tl))
        values[0, large] = current
        for m in range(m_max):
            current = ((2 * m + 1) * current - el) / (2.0 * tl)
            values[m + 1, large] = current

    return values.reshape((m_max + 1,) + t.shape)


def boys(m: int, t: float) -> float:
    """F_m(t) = integral of u^(2m) exp(-t u^2) for u in [0, 1]."""
    return float(boys_array(m, np.array([float(t)]))[m, 0])


def hermite_coefficients(
    i: int, j: int, xa: float, xb: float, alpha: float, beta: float
) -> np.ndarray:
    """Hermite expansion E^{ij}_t, t = 0..i+j, of a 1D Gaussian product."""
    p = alpha + beta
    q = alpha * beta / p
    xab = xa - xb
    xpa = -beta / p * xab
    xpb = alpha / p * xab

    table = np.zeros((i + 1, j + 1, i + j + 2))
    table[0, 0, 0] = math.exp(-q * xab * xab)
    for a in range(i + 1):
        for b in range(j + 1):
            if a == 0 and b == 0:
                continue
            if a > 0:
                prev, shift = table[a - 1, b], xpa
            else:
                prev, shift = table[a, b - 1], xpb
            for t in range(a + b + 1):
                value = shift * prev[t] + (t + 1) * prev[t + 1]
                if t > 0:
                    value += prev[t - 1] / (2.0 * p)
                table[a, b, t] = value
    return table[i, j, : i + j + 1]


def hermite_coulomb(p: float, pc: np.ndarray, l_max: int) -> Dict[Tuple[int, int, int], np.ndarray]:
    """Hermite Coulomb integrals R_tuv(p, P - C) for t + u + v <= l_max.

    ``pc`` has shape (npts, 3). Returned arrays have shape (npts,).
    """
    x, y, z = pc[:, 0], pc[:, 1], pc[:, 2]
    fm = boys_array(l_max, p * np.einsum("ij,ij->i", pc, pc))

    table: Dict[Tuple[int, int, int, int], np.ndarray] = {}
    for n in range(l_max + 1):
        table[(n, 0, 0, 0)] = (-2.0 * p) ** n * fm[n]

    for order in range(1, l_max + 1):
        for n in range(l_max - order + 1):
            for t in range(order, -1, -1):
                for u in range(order - t, -1, -1):
                    v = order - t - u
                    if t > 0:
                        value = x * table[(n + 1, t - 1, u, v)]
                        if t > 1:
                            value = value + (t - 1) * table[(n + 1, t - 2, u, v)]
                    elif u > 0:
                        value = y * table[(n + 1, t, u - 1, v)]
                        if u > 1:
                            value = value + (u - 1) * table[(n + 1, t, u - 2, v)]
                    else:
                        value = z * table[(n + 1, t, u, v - 1)]
                        if v > 1:
                            value = value + (v - 1) * table[(n + 1, t, u, v - 2)]
                    table[(n, t, u, v)] = value

    return {(t, u, v): r for (n, t, u, v), r in table.items() if n == 0}


class PrimitivePair:
    """Product of two unnormalized Cartesian primitives, ready for ESP evaluation."""

    def __init__(
        self,
        center_a: Sequence[float],
        powers_a: Sequence[int],
        alpha: float,
        center_b: Sequence[float],
        powers_b: Sequence[int],
        beta: float,
    ):
        self.p = alpha + beta
        a = np.asarray(center_a, dtype=float)
        b = np.asarray(center_b, dtype=float)
        self.center = (alpha * a + beta * b) / self.p
        self.prefactor = math.exp(-alpha * beta / self.p * float(np.dot(a - b, a - b)))
        self.expansions = [
            hermite_coefficients(powers_a[k], powers_b[k], a[k], b[k], alpha, beta)
            for k in range(3)
        ]
        self.l_max = sum(len(e) - 1 for e in self.expansions)

    def overlap(self) -> float:
        """Overlap integral of the product distribution."""
        ex, ey, ez = self.expansions
        return ex[0] * ey[0] * ez[0] * (math.pi / self.p) ** 1.5

    def potential(self, points: np.ndarray) -> np.ndarray:
        """Coulomb potential of the product distribution at each point."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        r = hermite_coulomb(self.p, self.center[np.newaxis, :] - points, self.l_max)
        ex, ey, ez = self.expansions
        total = np.zeros(len(points))
        for t, et in enumerate(ex):
            for u, eu in enumerate(ey):
                for v, ev in enumerate(ez):
                    coeff = et * eu * ev
                    if coeff != 0.0:
                        total += coeff * r[(t, u, v)]
        return 2.0 * math.pi / self.p * total


def esp_pair_integral(prim_a, prim_b, point) -> float:
    """Potential at ``point`` of the product of two primitives with coefficients.

    Each primitive is ``(center, type_code, exponent, coefficient)``; the
    coefficient multiplies the unnormalized Cartesian Gaussian.
    """
    center_a, type_a, alpha, coeff_a = prim_a
    center_b, type_b, beta, coeff_b = prim_b
    pair = PrimitivePair(
        center_a, cartesian_powers(type_a), alpha, center_b, cartesian_powers(type_b), beta
    )
    value = pair.potential(np.asarray(point, dtype=float)[np.newaxis, :])[0]
    return float(coeff_a * coeff_b * value)


def overlap_integral(
    center_a: Sequence[float], type_a: int, alpha: float,
    center_b: Sequence[float], type_b: int, beta: float,
) -> float:
    """Overlap of two unnormalized Cartesian primitives."""
    pair = PrimitivePair(
        center_a, cartesian_powers(type_a), alpha, center_b, cartesian_powers(type_b), beta
    )
    return float(pair.overlap())
