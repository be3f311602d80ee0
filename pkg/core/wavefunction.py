"""Reading and writing AIM .wfx wavefunction files."""

import io
import logging
import re
import sys
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from utils.constants import ELEMENT_SYMBOLS, OCCUPATION_TOLERANCE, WFX_SIGNIFICANT_DIGITS
from .errors import (
    InvariantViolation,
    MalformedNumber,
    MissingSection,
    SchemaError,
    UnsupportedPrimitiveType,
)
from .gaussian_integrals import cartesian_powers, primitive_norm

logger = logging.getLogger(__name__)

SPIN_TAGS = ("alpha", "beta", "paired")

_WFX_SPIN_NAMES = {"alpha and beta": "paired", "alpha": "alpha", "beta": "beta"}
_SPIN_TO_WFX = {"paired": "Alpha and Beta", "alpha": "Alpha", "beta": "Beta"}

_TAG = re.compile(r"^<\s*(/?)\s*([^<>]+?)\s*>$")

SECTION_NUCLEAR_COORDINATES = "Nuclear Cartesian Coordinates"
SECTION_PRIMITIVE_CENTERS = "Primitive Centers"
SECTION_PRIMITIVE_TYPES = "Primitive Types"
SECTION_PRIMITIVE_EXPONENTS = "Primitive Exponents"
SECTION_OCCUPATIONS = "Molecular Orbital Occupation Numbers"
SECTION_COEFFICIENTS = "Molecular Orbital Primitive Coefficients"
REQUIRED_SECTIONS = (
    SECTION_NUCLEAR_COORDINATES,
    SECTION_PRIMITIVE_CENTERS,
    SECTION_PRIMITIVE_TYPES,
    SECTION_PRIMITIVE_EXPONENTS,
    SECTION_OCCUPATIONS,
    SECTION_COEFFICIENTS,
)


@dataclass(frozen=True)
class Nucleus:
    symbol: str
    atomic_number: int
    position: Tuple[float, float, float]  # bohr


@dataclass(frozen=True)
class Primitive:
    center: int
    type_code: int
    exponent: float  # bohr^-2

    @property
    def powers(self) -> Tuple[int, int, int]:
        return cartesian_powers(self.type_code)


@dataclass(frozen=True)
class Orbital:
    occupation: float
    spin: str
    energy: float  # hartree
    coefficients: Tuple[float, ...]


@dataclass(frozen=True)
class WavefunctionData:
    """Validated, immutable single-determinant wavefunction."""

    nuclei: Tuple[Nucleus, ...]
    primitives: Tuple[Primitive, ...]
    orbitals: Tuple[Orbital, ...]
    declared_electron_count: int
    title: str = ""
    normalized_primitives: bool = True
    source: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        _validate(self)

    @cached_property
    def positions(self) -> np.ndarray:
        coords = np.array([n.position for n in self.nuclei], dtype=float).reshape(-1, 3)
        coords.setflags(write=False)
        return coords

    @cached_property
    def symbols(self) -> Tuple[str, ...]:
        return tuple(n.symbol for n in self.nuclei)

    @cached_property
    def primitive_centers(self) -> np.ndarray:
        return np.array([self.positions[p.center] for p in self.primitives]).reshape(-1, 3)

    @cached_property
    def primitive_exponents(self) -> np.ndarray:
        return np.array([p.exponent for p in self.primitives], dtype=float)

    @cached_property
    def primitive_powers(self) -> np.ndarray:
        return np.array([p.powers for p in self.primitives], dtype=int).reshape(-1, 3)

    @cached_property
    def primitive_norms(self) -> np.ndarray:
        """Normalization constants applied to each primitive (1 for raw files)."""
        if not self.normalized_primitives:
            return np.ones(len(self.primitives))
        return np.array([primitive_norm(p.exponent, p.powers) for p in self.primitives])

    @cached_property
    def coefficient_matrix(self) -> np.ndarray:
        """Orbital x primitive coefficients, normalization folded in."""
        coeffs = np.array([o.coefficients for o in self.orbitals], dtype=float)
        coeffs = coeffs.reshape(len(self.orbitals), len(self.primitives))
        return coeffs * self.primitive_norms[np.newaxis, :]

    @cached_property
    def spin_occupations(self) -> np.ndarray:
        """Per-spin occupations, shape (2, n_orbitals); paired orbitals split evenly."""
        occ = np.zeros((2, len(self.orbitals)))
        for i, orbital in enumerate(self.orbitals):
            if orbital.spin == "paired":
                occ[:, i] = 0.5 * orbital.occupation
            elif orbital.spin == "alpha":
                occ[0, i] = orbital.occupation
            else:
                occ[1, i] = orbital.occupation
        return occ


def _validate(wfn: WavefunctionData) -> None:
    n_nuclei = len(wfn.nuclei)
    n_prims = len(wfn.primitives)
    for index, prim in enumerate(wfn.primitives):
        if not 0 <= prim.center < n_nuclei:
            raise InvariantViolation(
                "Primitive center does not name a nucleus",
                section=SECTION_PRIMITIVE_CENTERS, primitive=index + 1, center=prim.center + 1,
            )
        if not prim.exponent > 0.0:
            raise InvariantViolation(
                "Primitive exponent must be positive",
                section=SECTION_PRIMITIVE_EXPONENTS, primitive=index + 1, exponent=prim.exponent,
            )
        cartesian_powers(prim.type_code)
    for index, orbital in enumerate(wfn.orbitals):
        if len(orbital.coefficients) != n_prims:
            raise InvariantViolation(
                "Orbital coefficient count differs from primitive count",
                section=SECTION_COEFFICIENTS, orbital=index + 1,
                found=len(orbital.coefficients), expected=n_prims,
            )
        if orbital.spin not in SPIN_TAGS:
            raise InvariantViolation("Unknown spin tag", orbital=index + 1, spin=orbital.spin)
        if not 0.0 <= orbital.occupation <= 2.0:
            raise InvariantViolation(
                "Occupation outside [0, 2]",
                section=SECTION_OCCUPATIONS, orbital=index + 1, occupation=orbital.occupation,
            )
    total = sum(o.occupation for o in wfn.orbitals)
    if abs(total - wfn.declared_electron_count) > OCCUPATION_TOLERANCE:
        raise InvariantViolation(
            "Occupation sum differs from declared electron count",
            section=SECTION_OCCUPATIONS, occupation_sum=total,
            declared=wfn.declared_electron_count,
        )


def electron_counts(wfn: WavefunctionData) -> Tuple[float, float]:
    """Per-spin occupation sums (N_alpha, N_beta)."""
    n_alpha = 0.0
    n_beta = 0.0
    for orbital in wfn.orbitals:
        if orbital.spin == "paired":
            n_alpha += 0.5 * orbital.occupation
            n_beta += 0.5 * orbital.occupation
        elif orbital.spin == "alpha":
            n_alpha += orbital.occupation
        else:
            n_beta += orbital.occupation
    return n_alpha, n_beta


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

@dataclass
class _Section:
    name: str
    start_line: int
    lines: List[Tuple[int, str]] = field(default_factory=list)


def _split_sections(text: str) -> Dict[str, _Section]:
    """Collect top-level sections; nested tags stay inside their parent."""
    sections: Dict[str, _Section] = {}
    current: Optional[_Section] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        match = _TAG.match(line)
        if current is None:
            if match and not match.group(1):
                current = _Section(match.group(2), lineno)
            continue
        if match and match.group(1) and match.group(2) == current.name:
            sections.setdefault(current.name, current)
            current = None
            continue
        current.lines.append((lineno, line))

    if current is not None:
        raise MissingSection(
            "Section is not terminated", section=current.name, line=current.start_line
        )
    return sections


def _require(sections: Dict[str, _Section], name: str) -> _Section:
    if name not in sections:
        raise MissingSection("Required section missing", section=name)
    return sections[name]


def _parse_float(token: str, section: str, lineno: int) -> float:
    try:
        return float(token.replace("D", "E").replace("d", "e"))
    except ValueError:
        raise MalformedNumber("Malformed number", section=section, line=lineno, token=token)


def _parse_int(token: str, section: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        pass
    value = _parse_float(token, section, lineno)
    if not value.is_integer():
        raise MalformedNumber("Malformed integer", section=section, line=lineno, token=token)
    return int(value)


def _floats(section: _Section) -> List[float]:
    return [
        _parse_float(token, section.name, lineno)
        for lineno, line in section.lines
        for token in line.split()
    ]


def _ints(section: _Section) -> List[int]:
    return [
        _parse_int(token, section.name, lineno)
        for lineno, line in section.lines
        for token in line.split()
    ]


def _expect_count(values: Sequence, expected: int, section: _Section) -> None:
    if len(values) != expected:
        raise InvariantViolation(
            "Unexpected number of entries",
            section=section.name, line=section.start_line, found=len(values), expected=expected,
        )


def _single_int(sections: Dict[str, _Section], name: str) -> Optional[int]:
    if name not in sections:
        return None
    values = _ints(sections[name])
    _expect_count(values, 1, sections[name])
    return values[0]


def _symbol_from_name(name: str) -> str:
    letters = re.match(r"[A-Za-z]+", name)
    return letters.group(0).capitalize() if letters else name


def _parse_nuclei(sections: Dict[str, _Section]) -> Tuple[Nucleus, ...]:
    coord_section = _require(sections, SECTION_NUCLEAR_COORDINATES)
    coords = _floats(coord_section)
    if len(coords) % 3:
        raise InvariantViolation(
            "Coordinate count is not a multiple of three",
            section=coord_section.name, line=coord_section.start_line,
        )
    n_nuclei = len(coords) // 3
    declared = _single_int(sections, "Number of Nuclei")
    if declared is not None and declared != n_nuclei:
        raise InvariantViolation(
            "Nucleus count differs from coordinates",
            section=coord_section.name, declared=declared, found=n_nuclei,
        )

    atomic_numbers: Optional[List[int]] = None
    if "Atomic Numbers" in sections:
        atomic_numbers = _ints(sections["Atomic Numbers"])
        _expect_count(atomic_numbers, n_nuclei, sections["Atomic Numbers"])
    names: Optional[List[str]] = None
    if "Nuclear Names" in sections:
        names = [token for _, line in sections["Nuclear Names"].lines for token in line.split()]
        _expect_count(names, n_nuclei, sections["Nuclear Names"])
    if atomic_numbers is None and names is None:
        raise MissingSection("Required section missing", section="Atomic Numbers")

    nuclei = []
    for i in range(n_nuclei):
        if atomic_numbers is not None:
            z = atomic_numbers[i]
            if 1 <= z <= len(ELEMENT_SYMBOLS):
                symbol = ELEMENT_SYMBOLS[z - 1]
            elif names is not None:
                symbol = _symbol_from_name(names[i])
            else:
                symbol = f"X{z}"
        else:
            symbol = _symbol_from_name(names[i])
            z = ELEMENT_SYMBOLS.index(symbol) + 1 if symbol in ELEMENT_SYMBOLS else 0
        position = tuple(coords[3 * i: 3 * i + 3])
        nuclei.append(Nucleus(symbol, z, position))
    return tuple(nuclei)


def _parse_primitives(sections: Dict[str, _Section], n_nuclei: int) -> Tuple[Primitive, ...]:
    centers_section = _require(sections, SECTION_PRIMITIVE_CENTERS)
    types_section = _require(sections, SECTION_PRIMITIVE_TYPES)
    exps_section = _require(sections, SECTION_PRIMITIVE_EXPONENTS)
    centers = _ints(centers_section)
    types = _ints(types_section)
    exponents = _floats(exps_section)

    declared = _single_int(sections, "Number of Primitives")
    expected = declared if declared is not None else len(centers)
    for values, section in (
        (centers, centers_section),
        (types, types_section),
        (exponents, exps_section),
    ):
        _expect_count(values, expected, section)

    primitives = []
    for index, (center, type_code, exponent) in enumerate(zip(centers, types, exponents)):
        if not 1 <= center <= n_nuclei:
            raise InvariantViolation(
                "Primitive center does not name a nucleus",
                section=centers_section.name, primitive=index + 1, center=center,
            )
        try:
            cartesian_powers(type_code)
        except UnsupportedPrimitiveType as exc:
            exc.context.update(section=types_section.name, primitive=index + 1)
            raise UnsupportedPrimitiveType(exc.message, **exc.context)
        primitives.append(Primitive(center - 1, type_code, exponent))
    return tuple(primitives)


def _parse_coefficients(section: _Section, n_prims: int) -> List[List[float]]:
    blocks: List[List[float]] = []
    expect_number = False
    for lineno, line in section.lines:
        match = _TAG.match(line)
        if match:
            if match.group(2) == "MO Number" and not match.group(1):
                expect_number = True
            continue
        if expect_number:
            # MO index line; only its position matters
            _parse_int(line.split()[0], section.name, lineno)
            blocks.append([])
            expect_number = False
            continue
        if not blocks:
            raise InvariantViolation(
                "Coefficients before any MO Number tag", section=section.name, line=lineno
            )
        blocks[-1].extend(_parse_float(token, section.name, lineno) for token in line.split())

    for index, block in enumerate(blocks):
        if len(block) != n_prims:
            raise InvariantViolation(
                "Orbital coefficient count differs from primitive count",
                section=section.name, orbital=index + 1, found=len(block), expected=n_prims,
            )
    return blocks


def _parse_spins(sections: Dict[str, _Section], n_orbitals: int) -> List[str]:
    if "Molecular Orbital Spin Types" not in sections:
        return ["paired"] * n_orbitals
    section = sections["Molecular Orbital Spin Types"]
    spins = []
    for lineno, line in section.lines:
        key = " ".join(line.lower().split())
        if key not in _WFX_SPIN_NAMES:
            raise InvariantViolation(
                "Unknown spin type", section=section.name, line=lineno, value=line
            )
        spins.append(_WFX_SPIN_NAMES[key])
    _expect_count(spins, n_orbitals, section)
    return spins


def parse_wfx(
    text: Union[str, TextIO],
    normalized_primitives: bool = True,
    source: Optional[str] = None,
) -> WavefunctionData:
    """Parse .wfx text into a validated WavefunctionData."""
    if not isinstance(text, str):
        text = text.read()
    sections = _split_sections(text)
    for name in REQUIRED_SECTIONS:
        _require(sections, name)

    nuclei = _parse_nuclei(sections)
    primitives = _parse_primitives(sections, len(nuclei))

    occ_section = sections[SECTION_OCCUPATIONS]
    occupations = _floats(occ_section)
    n_orbitals = len(occupations)
    blocks = _parse_coefficients(sections[SECTION_COEFFICIENTS], len(primitives))
    _expect_count(blocks, n_orbitals, sections[SECTION_COEFFICIENTS])

    energies = [0.0] * n_orbitals
    if "Molecular Orbital Energies" in sections:
        energies = _floats(sections["Molecular Orbital Energies"])
        _expect_count(energies, n_orbitals, sections["Molecular Orbital Energies"])
    spins = _parse_spins(sections, n_orbitals)

    declared = _single_int(sections, "Number of Electrons")
    if declared is None:
        declared = int(round(sum(occupations)))

    title = ""
    if "Title" in sections:
        title = " ".join(line for _, line in sections["Title"].lines)

    orbitals = tuple(
        Orbital(occ, spin, energy, tuple(block))
        for occ, spin, energy, block in zip(occupations, spins, energies, blocks)
    )
    try:
        wfn = WavefunctionData(
            nuclei=nuclei,
            primitives=primitives,
            orbitals=orbitals,
            declared_electron_count=declared,
            title=title,
            normalized_primitives=normalized_primitives,
            source=source,
        )
    except InvariantViolation as exc:
        exc.context.setdefault("line", occ_section.start_line)
        raise InvariantViolation(exc.message, **exc.context)

    logger.info(
        "Parsed %s: %d nuclei, %d primitives, %d orbitals",
        source or "wavefunction", len(nuclei), len(primitives), len(orbitals),
    )
    return wfn


def load_wfx(path: str, normalized_primitives: bool = True) -> WavefunctionData:
    """Read a .wfx file from disk, or from standard input when path is '-'."""
    if path == "-":
        return parse_wfx(sys.stdin, normalized_primitives, source="<stdin>")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_wfx(f, normalized_primitives, source=path)
    except UnicodeDecodeError:
        raise SchemaError("Wavefunction file is not UTF-8 text", path=path) from None


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return f"{value: .{WFX_SIGNIFICANT_DIGITS - 1}E}"


def _block(out: io.StringIO, name: str, lines: Sequence[str]) -> None:
    out.write(f"<{name}>\n")
    for line in lines:
        out.write(f" {line}\n")
    out.write(f"</{name}>\n")


def _chunks(values: Sequence[str], width: int) -> List[str]:
    return [" ".join(values[i: i + width]) for i in range(0, len(values), width)]


def write_wfx(wfn: WavefunctionData) -> str:
    """Serialize a WavefunctionData to .wfx text (16 significant digits)."""
    n_alpha, n_beta = electron_counts(wfn)
    out = io.StringIO()
    _block(out, "Title", [wfn.title or "apele-toolkit"])
    _block(out, "Keywords", ["GTO"])
    _block(out, "Number of Nuclei", [str(len(wfn.nuclei))])
    _block(out, "Number of Occupied Molecular Orbitals", [str(len(wfn.orbitals))])
    _block(out, "Number of Perturbations", ["0"])
    _block(out, "Net Charge", [str(sum(n.atomic_number for n in wfn.nuclei) - wfn.declared_electron_count)])
    _block(out, "Number of Electrons", [str(wfn.declared_electron_count)])
    _block(out, "Number of Alpha Electrons", [_fmt(n_alpha)])
    _block(out, "Number of Beta Electrons", [_fmt(n_beta)])
    _block(out, "Nuclear Names", [f"{n.symbol}{i + 1}" for i, n in enumerate(wfn.nuclei)])
    _block(out, "Atomic Numbers", [str(n.atomic_number) for n in wfn.nuclei])
    _block(out, "Nuclear Charges", [_fmt(float(n.atomic_number)) for n in wfn.nuclei])
    _block(out, SECTION_NUCLEAR_COORDINATES, [" ".join(_fmt(c) for c in n.position) for n in wfn.nuclei])
    _block(out, "Number of Primitives", [str(len(wfn.primitives))])
    _block(out, SECTION_PRIMITIVE_CENTERS, _chunks([str(p.center + 1) for p in wfn.primitives], 10))
    _block(out, SECTION_PRIMITIVE_TYPES, _chunks([str(p.type_code) for p in wfn.primitives], 10))
    _block(out, SECTION_PRIMITIVE_EXPONENTS, _chunks([_fmt(p.exponent) for p in wfn.primitives], 4))
    _block(out, SECTION_OCCUPATIONS, [_fmt(o.occupation) for o in wfn.orbitals])
    _block(out, "Molecular Orbital Energies", [_fmt(o.energy) for o in wfn.orbitals])
    _block(out, "Molecular Orbital Spin Types", [_SPIN_TO_WFX[o.spin] for o in wfn.orbitals])

    out.write(f"<{SECTION_COEFFICIENTS}>\n")
    for index, orbital in enumerate(wfn.orbitals, start=1):
        out.write("<MO Number>\n")
        out.write(f" {index}\n")
        out.write("</MO Number>\n")
        for line in _chunks([_fmt(c) for c in orbital.coefficients], 4):
            out.write(f" {line}\n")
    out.write(f"</{SECTION_COEFFICIENTS}>\n")
    return out.getvalue()
