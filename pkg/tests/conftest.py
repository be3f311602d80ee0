"""Shared fixtures: a one-primitive wavefunction and analytic hydrogen fields."""

import math
import re

import numpy as np
import pytest

from core.field_evaluator import FieldSample
from core.wavefunction import parse_wfx

MINIMAL_WFX = """\
<Title>
 single gaussian
</Title>
<Number of Nuclei>
 1
</Number of Nuclei>
<Number of Primitives>
 1
</Number of Primitives>
<Number of Electrons>
 1
</Number of Electrons>
<Atomic Numbers>
 1
</Atomic Numbers>
<Nuclear Cartesian Coordinates>
 0.0 0.0 0.0
</Nuclear Cartesian Coordinates>
<Primitive Centers>
 1
</Primitive Centers>
<Primitive Types>
 1
</Primitive Types>
<Primitive Exponents>
 1.0
</Primitive Exponents>
<Molecular Orbital Occupation Numbers>
 1.0
</Molecular Orbital Occupation Numbers>
<Molecular Orbital Spin Types>
 Alpha
</Molecular Orbital Spin Types>
<Molecular Orbital Primitive Coefficients>
<MO Number>
 1
</MO Number>
 1.0
</Molecular Orbital Primitive Coefficients>
"""


def without_section(text: str, name: str) -> str:
    """Drop one top-level section, tags included."""
    pattern = re.compile(rf"<{re.escape(name)}>\n.*?</{re.escape(name)}>\n", re.DOTALL)
    return pattern.sub("", text, count=1)


def replace_section(text: str, name: str, body: str) -> str:
    pattern = re.compile(rf"(<{re.escape(name)}>\n).*?(</{re.escape(name)}>\n)", re.DOTALL)
    return pattern.sub(lambda m: f"{m.group(1)} {body}\n{m.group(2)}", text, count=1)


def hydrogen_fields(r: float) -> FieldSample:
    """Exact 1s fields of one alpha electron at (0, 0, r)."""
    rho = math.exp(-2.0 * r) / math.pi
    return FieldSample(
        rho=(rho, 0.0),
        grad_rho=((0.0, 0.0, -2.0 * rho), (0.0, 0.0, 0.0)),
        lap_rho=(rho * (4.0 - 4.0 / r), 0.0),
        tau=(rho, 0.0),
    )


def hydrogen_hole_potential(r):
    """Potential of the exact hydrogen exchange hole at distance r."""
    r = np.asarray(r, dtype=float)
    return -(1.0 - np.exp(-2.0 * r) * (1.0 + r)) / r


@pytest.fixture
def minimal_text():
    return MINIMAL_WFX


@pytest.fixture
def single_gaussian():
    return parse_wfx(MINIMAL_WFX, source="single_gaussian.wfx")


@pytest.fixture
def minimal_wfx_path(tmp_path):
    path = tmp_path / "single_gaussian.wfx"
    path.write_text(MINIMAL_WFX)
    return str(path)
