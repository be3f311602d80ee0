"""Static Lebedev angular quadrature tables.

Each rule is stored as a list of octahedral orbit generators. An orbit is
``(kind, a, b, weight)`` where ``kind`` selects the representative point:

    0: (1, 0, 0)                          6 points
    1: (0, s, s), s = 1/sqrt(2)          12 points
    2: (s, s, s), s = 1/sqrt(3)           8 points
    3: (a, a, sqrt(1 - 2a^2))            24 points
    4: (a, sqrt(1 - a^2), 0)             24 points
    5: (a, b, sqrt(1 - a^2 - b^2))       48 points

Weights are normalized to sum to one over the unit sphere.
"""

import itertools
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np

from .errors import UnsupportedLebedevOrder

Orbit = Tuple[int, float, float, float]

LEBEDEV_ORBITS: Dict[int, List[Orbit]] = {
    6: [
        (0, 0.0, 0.0, 0.1666666666666667e0),
    ],
    26: [
        (0, 0.0, 0.0, 0.4761904761904762e-1),
        (1, 0.0, 0.0, 0.3809523809523810e-1),
        (2, 0.0, 0.0, 0.3214285714285714e-1),
    ],
    50: [
        (0, 0.0, 0.0, 0.1269841269841270e-1),
        (1, 0.0, 0.0, 0.2257495590828924e-1),
        (2, 0.0, 0.0, 0.2109375000000000e-1),
        (3, 0.3015113445777636e0, 0.0, 0.2017333553791887e-1),
    ],
    110: [
        (0, 0.0, 0.0, 0.3828270494937162e-2),
        (2, 0.0, 0.0, 0.9793737512487512e-2),
        (3, 0.1851156353447362e0, 0.0, 0.8211737283191111e-2),
        (3, 0.6904210483822922e0, 0.0, 0.9942814891178103e-2),
        (3, 0.3956894730559419e0, 0.0, 0.9595471336070963e-2),
        (4, 0.4783690288121502e0, 0.0, 0.9694996361663028e-2),
    ],
    194: [
        (0, 0.0, 0.0, 0.1782340447244611e-2),
        (1, 0.0, 0.0, 0.5716905949977102e-2),
        (2, 0.0, 0.0, 0.5573383178848738e-2),
        (3, 0.6712973442695226e0, 0.0, 0.5608704082587997e-2),
        (3, 0.2892465627575439e0, 0.0, 0.5158237711805383e-2),
        (3, 0.4446933178717437e0, 0.0, 0.5518771467273614e-2),
        (3, 0.1299335447650067e0, 0.0, 0.4106777028169394e-2),
        (4, 0.3457702197611283e0, 0.0, 0.5051846064614808e-2),
        (5, 0.1590417105383530e0, 0.8360360154824589e0, 0.5530248916233094e-2),
    ],
    302: [
        (0, 0.0, 0.0, 0.8545911725128148e-3),
        (2, 0.0, 0.0, 0.3599119285025571e-2),
        (3, 0.3515640345570105e0, 0.0, 0.3449788424305883e-2),
        (3, 0.6566329410219612e0, 0.0, 0.3604822601419882e-2),
        (3, 0.4729054132581005e0, 0.0, 0.3576729661743367e-2),
        (3, 0.9618308522614784e-1, 0.0, 0.2352101413689164e-2),
        (3, 0.2219645236294178e0, 0.0, 0.3108953122413675e-2),
        (3, 0.7011766416089545e0, 0.0, 0.3650045807677255e-2),
        (4, 0.2644152887060663e0, 0.0, 0.2982344963171804e-2),
        (4, 0.5718955891878961e0, 0.0, 0.3600820932216460e-2),
        (5, 0.2510034751770465e0, 0.8000727494073952e0, 0.3571540554273387e-2),
        (5, 0.1233548532583327e0, 0.4127724083168531e0, 0.3392312205006170e-2),
    ],
}


def _representative(kind: int, a: float, b: float) -> Tuple[float, float, float]:
    if kind == 0:
        return (1.0, 0.0, 0.0)
    if kind == 1:
        s = np.sqrt(0.5)
        return (0.0, s, s)
    if kind == 2:
        s = np.sqrt(1.0 / 3.0)
        return (s, s, s)
    if kind == 3:
        return (a, a, np.sqrt(1.0 - 2.0 * a * a))
    if kind == 4:
        return (a, np.sqrt(1.0 - a * a), 0.0)
    return (a, b, np.sqrt(1.0 - a * a - b * b))


def _octahedral_orbit(point: Tuple[float, float, float]) -> np.ndarray:
    """All distinct images of a point under permutations and sign flips."""
    images = []
    for perm in itertools.permutations(point):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            images.append(np.array(perm) * np.array(signs))
    images = np.array(images)
    # -0.0 and 0.0 must collapse to one key
    keys = np.round(images, 12) + 0.0
    _, first = np.unique(keys, axis=0, return_index=True)
    return images[np.sort(first)]


@lru_cache(maxsize=None)
def lebedev_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return (unit vectors, weights) of a supported Lebedev rule."""
    if order not in LEBEDEV_ORBITS:
        raise UnsupportedLebedevOrder(
            "Unsupported Lebedev order",
            order=order,
            supported=tuple(sorted(LEBEDEV_ORBITS)),
        )

    directions = []
    weights = []
    for kind, a, b, weight in LEBEDEV_ORBITS[order]:
        orbit = _octahedral_orbit(_representative(kind, a, b))
        directions.append(orbit)
        weights.append(np.full(len(orbit), weight))

    directions = np.vstack(directions)
    weights = np.concatenate(weights)
    directions.setflags(write=False)
    weights.setflags(write=False)
    return directions, weights
