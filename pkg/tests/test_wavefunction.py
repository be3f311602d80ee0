"""Tests for core.wavefunction."""

import numpy as np
import pytest

from conftest import MINIMAL_WFX, replace_section, without_section
from core.errors import (
    ApeleError,
    InvariantViolation,
    MalformedNumber,
    MissingSection,
    SchemaError,
    UnsupportedPrimitiveType,
)
from core.model_systems import hydrogen_molecule
from core.wavefunction import electron_counts, load_wfx, parse_wfx, write_wfx


class TestParseWfx:

    def test_minimal_file(self, single_gaussian):
        wfn = single_gaussian
        assert wfn.title == "single gaussian"
        assert wfn.symbols == ("H",)
        assert wfn.nuclei[0].atomic_number == 1
        assert wfn.nuclei[0].position == (0.0, 0.0, 0.0)
        assert len(wfn.primitives) == 1
        assert wfn.primitives[0].center == 0
        assert wfn.primitives[0].type_code == 1
        assert wfn.primitives[0].exponent == 1.0
        assert wfn.orbitals[0].spin == "alpha"
        assert wfn.declared_electron_count == 1
        assert wfn.source == "single_gaussian.wfx"

    def test_normalization_folded_into_coefficients(self, single_gaussian):
        assert single_gaussian.coefficient_matrix[0, 0] == pytest.approx((2.0 / np.pi) ** 0.75, rel=1e-14)

    def test_raw_primitives_keep_coefficients(self):
        wfn = parse_wfx(MINIMAL_WFX, normalized_primitives=False)
        assert wfn.coefficient_matrix[0, 0] == 1.0

    def test_fortran_exponent_notation(self):
        wfn = parse_wfx(replace_section(MINIMAL_WFX, "Primitive Exponents", "1.5D+00"))
        assert wfn.primitives[0].exponent == 1.5

    def test_spin_types_default_to_paired(self):
        text = without_section(MINIMAL_WFX, "Molecular Orbital Spin Types")
        wfn = parse_wfx(text)
        assert wfn.orbitals[0].spin == "paired"
        assert electron_counts(wfn) == (0.5, 0.5)

    def test_nuclear_names_stand_in_for_atomic_numbers(self):
        text = without_section(MINIMAL_WFX, "Atomic Numbers")
        text = text.replace("<Nuclear Cartesian Coordinates>", "<Nuclear Names>\n H1\n</Nuclear Names>\n<Nuclear Cartesian Coordinates>")
        wfn = parse_wfx(text)
        assert wfn.symbols == ("H",)
        assert wfn.nuclei[0].atomic_number == 1

    def test_reads_from_stream(self, tmp_path):
        path = tmp_path / "h.wfx"
        path.write_text(MINIMAL_WFX)
        with open(path) as f:
            wfn = parse_wfx(f)
        assert len(wfn.orbitals) == 1


class TestParseErrors:

    @pytest.mark.parametrize(
        "section",
        [
            "Nuclear Cartesian Coordinates",
            "Primitive Centers",
            "Primitive Types",
            "Primitive Exponents",
            "Molecular Orbital Occupation Numbers",
            "Molecular Orbital Primitive Coefficients",
        ],
    )
    def test_missing_required_section(self, section):
        with pytest.raises(MissingSection) as info:
            parse_wfx(without_section(MINIMAL_WFX, section))
        assert info.value.context["section"] == section

    def test_missing_atomic_numbers_and_names(self):
        with pytest.raises(MissingSection):
            parse_wfx(without_section(MINIMAL_WFX, "Atomic Numbers"))

    def test_occupation_sum_differs_from_electron_count(self):
        text = replace_section(MINIMAL_WFX, "Number of Electrons", "2")
        with pytest.raises(InvariantViolation, match="declared electron count"):
            parse_wfx(text)

    def test_occupation_above_two(self):
        text = replace_section(MINIMAL_WFX, "Molecular Orbital Occupation Numbers", "2.5")
        text = replace_section(text, "Number of Electrons", "3")
        with pytest.raises(InvariantViolation, match="Occupation outside"):
            parse_wfx(text)

    def test_unsupported_primitive_type(self):
        text = replace_section(MINIMAL_WFX, "Primitive Types", "21")
        with pytest.raises(UnsupportedPrimitiveType) as info:
            parse_wfx(text)
        assert info.value.context["type_code"] == 21
        assert info.value.context["primitive"] == 1

    def test_malformed_number_names_its_line(self):
        text = replace_section(MINIMAL_WFX, "Primitive Exponents", "1.0x")
        with pytest.raises(MalformedNumber) as info:
            parse_wfx(text)
        assert info.value.context["section"] == "Primitive Exponents"
        assert info.value.context["token"] == "1.0x"

    def test_primitive_center_out_of_range(self):
        text = replace_section(MINIMAL_WFX, "Primitive Centers", "2")
        with pytest.raises(InvariantViolation, match="does not name a nucleus"):
            parse_wfx(text)

    def test_coefficient_count_mismatch(self):
        text = MINIMAL_WFX.replace(" 1.0\n</Molecular Orbital Primitive Coefficients>", " 1.0 0.5\n</Molecular Orbital Primitive Coefficients>")
        with pytest.raises(InvariantViolation, match="coefficient count"):
            parse_wfx(text)

    def test_truncated_file(self):
        truncated = MINIMAL_WFX[: MINIMAL_WFX.index("</Molecular Orbital Primitive Coefficients>")]
        with pytest.raises(ApeleError):
            parse_wfx(truncated)

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            parse_wfx("")


class TestElectronCounts:

    @pytest.mark.parametrize(
        "spin, occupation, expected",
        [
            ("Alpha and Beta", "2.0", (1.0, 1.0)),
            ("Alpha", "1.0", (1.0, 0.0)),
            ("Beta", "1.0", (0.0, 1.0)),
        ],
    )
    def test_counts_by_spin(self, spin, occupation, expected):
        text = replace_section(MINIMAL_WFX, "Molecular Orbital Spin Types", spin)
        text = replace_section(text, "Molecular Orbital Occupation Numbers", occupation)
        text = replace_section(text, "Number of Electrons", str(int(float(occupation))))
        assert electron_counts(parse_wfx(text)) == expected


class TestWriteWfx:

    def test_round_trip_is_exact_for_representable_values(self, single_gaussian):
        again = parse_wfx(write_wfx(single_gaussian))
        assert again == single_gaussian

    def test_round_trip_of_generated_molecule(self):
        wfn = hydrogen_molecule(0.74)
        again = parse_wfx(write_wfx(wfn))
        assert again.symbols == wfn.symbols
        assert [p.type_code for p in again.primitives] == [p.type_code for p in wfn.primitives]
        np.testing.assert_allclose(again.positions, wfn.positions, rtol=1e-14)
        np.testing.assert_allclose(again.primitive_exponents, wfn.primitive_exponents, rtol=1e-14)
        np.testing.assert_allclose(again.coefficient_matrix, wfn.coefficient_matrix, rtol=1e-14)
        assert electron_counts(again) == pytest.approx(electron_counts(wfn))


class TestLoadWfx:

    def test_load_records_source(self, minimal_wfx_path):
        wfn = load_wfx(minimal_wfx_path)
        assert wfn.source == minimal_wfx_path

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_wfx(str(tmp_path / "absent.wfx"))

    def test_binary_file(self, tmp_path):
        path = tmp_path / "binary.wfx"
        path.write_bytes(b"<Title>\n \xff\xfe\n</Title>\n")
        with pytest.raises(SchemaError, match="UTF-8"):
            load_wfx(str(path))
