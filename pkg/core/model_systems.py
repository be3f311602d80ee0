"""Minimal-basis model wavefunctions built in code.

Hydrogen uses contracted Slater-type 1s functions; carbon and oxygen use the
three-Gaussian 1s and 2sp contractions. Polyatomic orbitals come from an
extended-Hueckel generalized eigenproblem, which yields overlap-orthonormal
occupied orbitals without any self-consistent step.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import linalg

from utils.constants import ANGSTROM_TO_BOHR
from .errors import UnsupportedPrimitiveType
from .gaussian_integrals import boys_array, cartesian_powers, overlap_integral, primitive_norm
from .wavefunction import Nucleus, Orbital, Primitive, WavefunctionData

logger = logging.getLogger(__name__)

# Unit-exponent contractions over normalized primitives: (exponents, coefficients)
STO6G_1S = (
    (23.10303149, 4.235915534, 1.185056519, 0.4070988982, 0.1580884151, 0.06510953954),
    (0.009163596281, 0.04936149294, 0.1685383049, 0.3705627997, 0.4164915298, 0.1303340841),
)
STO3G_1S = (
    (2.227660584, 0.4057711562, 0.1098175104),
    (0.1543289673, 0.5353281423, 0.4446345422),
)
STO3G_2SP_EXPONENTS = (0.9942027530, 0.2310313333, 0.07513856000)
STO3G_2S_COEFFICIENTS = (-0.09996722919, 0.3995128261, 0.7001154689)
STO3G_2P_COEFFICIENTS = (0.1559162750, 0.6076837186, 0.3919573931)

# Slater exponents (1s, 2sp)
SLATER_EXPONENTS = {"H": (1.24, None), "C": (5.67, 1.72), "O": (7.66, 2.25)}
ATOMIC_NUMBERS = {"H": 1, "C": 6, "O": 8}

# Valence-state ionization energies (eV) for the Hueckel diagonal
HUECKEL_DIAGONAL_EV = {
    ("H", "1s"): -13.6,
    ("C", "1s"): -308.0,
    ("C", "2s"): -21.4,
    ("C", "2p"): -11.4,
    ("O", "1s"): -562.0,
    ("O", "2s"): -32.3,
    ("O", "2p"): -14.8,
}
HUECKEL_K = 1.75
HARTREE_EV = 27.211386245988


@dataclass(frozen=True)
class AtomicOrbital:
    atom: int
    shell: str
    type_code: int
    exponents: Tuple[float, ...]
    coefficients: Tuple[float, ...]


def _scaled(exponents: Sequence[float], zeta: float) -> Tuple[float, ...]:
    return tuple(alpha * zeta * zeta for alpha in exponents)


def atomic_orbitals(symbol: str, atom: int, hydrogen_contraction=STO3G_1S) -> List[AtomicOrbital]:
    """Minimal basis of one atom: 1s, then 2s and the three 2p for C and O."""
    zeta_1s, zeta_2sp = SLATER_EXPONENTS[symbol]
    if symbol == "H":
        exponents, coefficients = hydrogen_contraction
        return [AtomicOrbital(atom, "1s", 1, _scaled(exponents, zeta_1s), coefficients)]

    orbitals = [AtomicOrbital(atom, "1s", 1, _scaled(STO3G_1S[0], zeta_1s), STO3G_1S[1])]
    sp = _scaled(STO3G_2SP_EXPONENTS, zeta_2sp)
    orbitals.append(AtomicOrbital(atom, "2s", 1, sp, STO3G_2S_COEFFICIENTS))
    for type_code in (2, 3, 4):
        orbitals.append(AtomicOrbital(atom, "2p", type_code, sp, STO3G_2P_COEFFICIENTS))
    return orbitals


def overlap_matrix(nuclei: Sequence[Nucleus], aos: Sequence[AtomicOrbital]) -> np.ndarray:
    """Overlap of the contracted functions, normalized primitives included."""
    size = len(aos)
    s = np.zeros((size, size))
    for i, a in enumerate(aos):
        for j in range(i + 1):
            b = aos[j]
            total = 0.0
            for alpha, da in zip(a.exponents, a.coefficients):
                na = primitive_norm(alpha, cartesian_powers(a.type_code))
                for beta, db in zip(b.exponents, b.coefficients):
                    nb = primitive_norm(beta, cartesian_powers(b.type_code))
                    total += da * db * na * nb * overlap_integral(
                        nuclei[a.atom].position, a.type_code, alpha,
                        nuclei[b.atom].position, b.type_code, beta,
                    )
            s[i, j] = s[j, i] = total
    return s


def assemble_wavefunction(
    title: str,
    nuclei: Sequence[Nucleus],
    aos: Sequence[AtomicOrbital],
    mo_coefficients: np.ndarray,
    occupations: Sequence[float],
    spins: Sequence[str],
    energies: Sequence[float] = (),
) -> WavefunctionData:
    """Expand contracted-function orbitals (columns of ``mo_coefficients``) over primitives."""
    primitives: List[Primitive] = []
    expansion: List[Tuple[int, float]] = []  # (ao index, contraction coefficient) per primitive
    for index, ao in enumerate(aos):
        for alpha, d in zip(ao.exponents, ao.coefficients):
            primitives.append(Primitive(ao.atom, ao.type_code, alpha))
            expansion.append((index, d))

    energies = list(energies) or [0.0] * len(occupations)
    orbitals = []
    for k, (occupation, spin) in enumerate(zip(occupations, spins)):
        coefficients = tuple(float(mo_coefficients[ao, k] * d) for ao, d in expansion)
        orbitals.append(Orbital(float(occupation), spin, float(energies[k]), coefficients))

    return WavefunctionData(
        nuclei=tuple(nuclei),
        primitives=tuple(primitives),
        orbitals=tuple(orbitals),
        declared_electron_count=int(round(sum(occupations))),
        title=title,
    )


def _nucleus(symbol: str, position_angstrom: Sequence[float]) -> Nucleus:
    position = tuple(float(c) * ANGSTROM_TO_BOHR for c in position_angstrom)
    return Nucleus(symbol, ATOMIC_NUMBERS[symbol], position)


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

def hydrogen_atom() -> WavefunctionData:
    """One alpha electron in a six-Gaussian fit of the exact 1s orbital."""
    nuclei = [Nucleus("H", 1, (0.0, 0.0, 0.0))]
    exponents, coefficients = STO6G_1S
    aos = [AtomicOrbital(0, "1s", 1, exponents, coefficients)]
    norm = 1.0 / math.sqrt(overlap_matrix(nuclei, aos)[0, 0])
    return assemble_wavefunction("H atom", nuclei, aos, np.array([[norm]]), [1.0], ["alpha"], [-0.5])


def _bonding_pairs(
    nuclei: Sequence[Nucleus], pairs: Sequence[Tuple[int, int]]
) -> Tuple[np.ndarray, List[AtomicOrbital]]:
    """Normalized in-phase combinations of the 1s functions of each atom pair."""
    aos = [a for i, n in enumerate(nuclei) for a in atomic_orbitals(n.symbol, i, STO6G_1S)]
    s = overlap_matrix(nuclei, aos)
    mo = np.zeros((len(aos), len(pairs)))
    for k, (i, j) in enumerate(pairs):
        norm = 1.0 / math.sqrt(s[i, i] + s[j, j] + 2.0 * s[i, j])
        mo[i, k] = mo[j, k] = norm
    return mo, aos


def hydrogen_molecule(distance_angstrom: float = 0.74) -> WavefunctionData:
    """Restricted H2: both electrons in the sigma_g combination of scaled 1s functions."""
    half = 0.5 * distance_angstrom
    nuclei = [_nucleus("H", (0.0, 0.0, -half)), _nucleus("H", (0.0, 0.0, half))]
    mo, aos = _bonding_pairs(nuclei, [(0, 1)])
    return assemble_wavefunction(
        f"H2 R={distance_angstrom:.3f} A", nuclei, aos, mo, [2.0], ["paired"]
    )


def h2_dimer(distance_angstrom: float = 5.0, separation_angstrom: float = 50.0) -> WavefunctionData:
    """Two restricted H2 molecules side by side, ``separation_angstrom`` apart."""
    half = 0.5 * distance_angstrom
    nuclei = [
        _nucleus("H", (0.0, 0.0, -half)),
        _nucleus("H", (0.0, 0.0, half)),
        _nucleus("H", (separation_angstrom, 0.0, -half)),
        _nucleus("H", (separation_angstrom, 0.0, half)),
    ]
    mo, aos = _bonding_pairs(nuclei, [(0, 1), (2, 3)])
    return assemble_wavefunction(
        f"(H2)2 R={distance_angstrom:.3f} A", nuclei, aos, mo, [2.0, 2.0], ["paired", "paired"]
    )


def hueckel_orbitals(nuclei: Sequence[Nucleus], aos: Sequence[AtomicOrbital]) -> Tuple[np.ndarray, np.ndarray]:
    """Extended-Hueckel orbital energies (hartree) and S-orthonormal coefficients."""
    s = overlap_matrix(nuclei, aos)
    diagonal = np.array(
        [HUECKEL_DIAGONAL_EV[(nuclei[ao.atom].symbol, ao.shell)] / HARTREE_EV for ao in aos]
    )
    h = HUECKEL_K * s * 0.5 * (diagonal[:, np.newaxis] + diagonal[np.newaxis, :])
    np.fill_diagonal(h, diagonal)
    energies, coefficients = linalg.eigh(h, s)
    return energies, coefficients


def closed_shell_molecule(title: str, nuclei: Sequence[Nucleus]) -> WavefunctionData:
    """Doubly occupy the lowest extended-Hueckel orbitals of a neutral molecule."""
    aos = [ao for i, n in enumerate(nuclei) for ao in atomic_orbitals(n.symbol, i)]
    energies, coefficients = hueckel_orbitals(nuclei, aos)
    n_electrons = sum(n.atomic_number for n in nuclei)
    n_occupied = n_electrons // 2
    logger.debug("%s: %d functions, %d occupied orbitals", title, len(aos), n_occupied)
    return assemble_wavefunction(
        title, nuclei, aos, coefficients[:, :n_occupied],
        [2.0] * n_occupied, ["paired"] * n_occupied, energies[:n_occupied],
    )


def water_like() -> WavefunctionData:
    nuclei = [
        _nucleus("O", (0.0, 0.0, 0.0)),
        _nucleus("H", (0.7572, 0.5865, 0.0)),
        _nucleus("H", (-0.7572, 0.5865, 0.0)),
    ]
    return closed_shell_molecule("water-like", nuclei)


def ethane_like(cc_distance_angstrom: float = 1.54) -> WavefunctionData:
    """Staggered ethane with the C-C bond along z."""
    ch = 1.09
    angle = math.radians(111.2)
    radial = ch * math.sin(math.pi - angle)
    axial = ch * math.cos(math.pi - angle)
    half = 0.5 * cc_distance_angstrom
    nuclei = [_nucleus("C", (0.0, 0.0, -half)), _nucleus("C", (0.0, 0.0, half))]
    for k in range(3):
        phi = 2.0 * math.pi * k / 3.0
        nuclei.append(_nucleus("H", (radial * math.cos(phi), radial * math.sin(phi), -half - axial)))
    for k in range(3):
        phi = 2.0 * math.pi * k / 3.0 + math.pi / 3.0
        nuclei.append(_nucleus("H", (radial * math.cos(phi), radial * math.sin(phi), half + axial)))
    return closed_shell_molecule(f"ethane-like C-C={cc_distance_angstrom:.3f} A", nuclei)


FIXTURES: Dict[str, object] = {
    "h_atom": hydrogen_atom,
    "h2_0.74A": lambda: hydrogen_molecule(0.74),
    "h2_1.5A": lambda: hydrogen_molecule(1.5),
    "h2_2.5A": lambda: hydrogen_molecule(2.5),
    "h2_3.5A": lambda: hydrogen_molecule(3.5),
    "h2_5A": lambda: hydrogen_molecule(5.0),
    "h2_5A_dimer": h2_dimer,
    "water_like": water_like,
    "ethane_like": ethane_like,
    "ethane_like_2.5A": lambda: ethane_like(2.5),
}


def exact_exchange_energy(wfn: WavefunctionData) -> float:
    """Total exact-exchange energy -1/2 sum_s sum_abcd D_ac D_bd (ab|cd), hartree.

    Four-centre integrals are closed-form for s-type primitives only, which
    covers the hydrogen fixtures; D is the per-spin density matrix over
    primitives with normalization folded in.
    """
    if any(p.type_code != 1 for p in wfn.primitives):
        raise UnsupportedPrimitiveType("Reference exchange needs s-type primitives only", title=wfn.title)

    alpha = wfn.primitive_exponents
    centers = wfn.primitive_centers
    p = alpha[:, None] + alpha[None, :]
    d2 = ((centers[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
    k = np.exp(-alpha[:, None] * alpha[None, :] / p * d2)
    mid = (alpha[:, None, None] * centers[:, None, :] + alpha[None, :, None] * centers[None, :, :]) / p[..., None]

    # (ab|cd) over unnormalized s primitives
    p_ab = p[:, :, None, None]
    p_cd = p[None, None, :, :]
    reduced = p_ab * p_cd / (p_ab + p_cd)
    sep2 = ((mid[:, :, None, None, :] - mid[None, None, :, :, :]) ** 2).sum(axis=-1)
    f0 = boys_array(0, reduced * sep2)[0]
    eri = (
        2.0 * math.pi ** 2.5 / (p_ab * p_cd * np.sqrt(p_ab + p_cd))
        * k[:, :, None, None] * k[None, None, :, :] * f0
    )

    coeffs = wfn.coefficient_matrix
    energy = 0.0
    for occ in wfn.spin_occupations:
        d = np.einsum("i,ia,ic->ac", occ, coeffs, coeffs)
        energy -= 0.5 * float(np.einsum("ac,bd,abcd->", d, d, eri))
    return energy
