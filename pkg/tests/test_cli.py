"""End-to-end tests of the command line through main(argv)."""

import io
import json
from pathlib import Path

import pandas as pd
import pytest

from cli.config import grid_settings, load_config_file, parse_grid, resolve_threads
from core.errors import MissingFile, SchemaError
from main import main
from utils.constants import EXIT_ERROR, EXIT_OK, EXIT_USAGE

TABLES = Path(__file__).resolve().parent.parent / "data" / "tables"
TINY_GRID = ["--grid", "16x6"]


class TestUsage:

    def test_no_subcommand(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == EXIT_USAGE

    def test_missing_required_flag(self):
        with pytest.raises(SystemExit) as info:
            main(["corr"])
        assert info.value.code == EXIT_USAGE

    def test_bad_choice(self):
        with pytest.raises(SystemExit) as info:
            main(["corr", "--series", "x.csv", "--format", "xml"])
        assert info.value.code == EXIT_USAGE


class TestApeleCommand:

    def test_single_input_to_stdout(self, capsys, minimal_wfx_path):
        assert main(["apele", "--wfx", minimal_wfx_path, *TINY_GRID]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["atoms"][0]["symbol"] == "H"
        assert data["provenance"]["grid"] == "16x6"
        assert data["gross_ele"] == pytest.approx(sum(a["apele"] for a in data["atoms"]), abs=1e-10)

    def test_missing_file(self, tmp_path):
        assert main(["apele", "--wfx", str(tmp_path / "absent.wfx")]) == EXIT_ERROR

    def test_malformed_wavefunction(self, tmp_path):
        path = tmp_path / "broken.wfx"
        path.write_text("<Title>\n broken\n")
        assert main(["apele", "--wfx", str(path), *TINY_GRID]) == EXIT_ERROR

    def test_wavefunction_not_utf8(self, tmp_path):
        path = tmp_path / "binary.wfx"
        path.write_bytes(b"\xff\xfe<Title>\n")
        assert main(["apele", "--wfx", str(path), *TINY_GRID]) == EXIT_ERROR

    def test_bad_grid(self, minimal_wfx_path):
        assert main(["apele", "--wfx", minimal_wfx_path, "--grid", "32x100"]) == EXIT_ERROR

    def test_groups_and_outputs(self, tmp_path, minimal_wfx_path):
        report = tmp_path / "report.txt"
        atoms = tmp_path / "atoms.csv"
        status = main(
            [
                "apele", "--wfx", minimal_wfx_path, *TINY_GRID,
                "--groups", "ALL=1", "--qr-group", "ALL",
                "--format", "text", "--output", str(report), "--atom-csv", str(atoms),
            ]
        )
        assert status == EXIT_OK
        assert "ALL" in report.read_text()
        assert list(pd.read_csv(atoms)["symbol"]) == ["H"]

    def test_qr_group_needs_groups(self, minimal_wfx_path):
        assert main(["apele", "--wfx", minimal_wfx_path, *TINY_GRID, "--qr-group", "ALL"]) == EXIT_ERROR

    def test_several_inputs_write_a_directory_and_series(self, tmp_path, minimal_wfx_path):
        second = tmp_path / "copy.wfx"
        second.write_text(Path(minimal_wfx_path).read_text())
        out_dir = tmp_path / "reports"
        series = tmp_path / "series.csv"
        status = main(
            [
                "apele", "--wfx", minimal_wfx_path, str(second), *TINY_GRID,
                "--tag", "first", "second", "--output", str(out_dir), "--series-out", str(series),
            ]
        )
        assert status == EXIT_OK
        assert sorted(p.name for p in out_dir.iterdir()) == ["copy.json", "single_gaussian.json"]
        frame = pd.read_csv(series)
        assert list(frame.columns) == ["tag", "APELE[H1]", "N_u"]
        assert list(frame["tag"]) == ["first", "second"]
        assert frame["N_u"][0] == frame["N_u"][1]

    def test_tag_count_must_match(self, minimal_wfx_path):
        assert main(["apele", "--wfx", minimal_wfx_path, *TINY_GRID, "--tag", "a", "b"]) == EXIT_ERROR

    def test_config_file_supplies_flags(self, tmp_path, capsys, minimal_wfx_path):
        config = tmp_path / "run.cfg"
        config.write_text(f"wfx = {minimal_wfx_path}\ngrid = 16x6\nformat = csv\n")
        assert main(["apele", "--config", str(config)]) == EXIT_OK
        assert capsys.readouterr().out.startswith("atom,symbol,apele")

    def test_unknown_config_key(self, tmp_path, minimal_wfx_path):
        config = tmp_path / "run.cfg"
        config.write_text("colour = blue\n")
        with pytest.raises(SystemExit) as info:
            main(["apele", "--wfx", minimal_wfx_path, "--config", str(config)])
        assert info.value.code == EXIT_USAGE


class TestGridDump:

    def test_writes_points(self, tmp_path, minimal_wfx_path):
        path = tmp_path / "grid.csv"
        assert main(["grid-dump", "--wfx", minimal_wfx_path, "--grid", "8x6", "--output", str(path)]) == EXIT_OK
        assert len(pd.read_csv(path)) == 48


class TestDiagCommand:

    def test_overlap_only(self, capsys):
        assert main(["diag", "--overlap", "0.5617"]) == EXIT_OK
        rows = {row["diagnostic"]: row for row in json.loads(capsys.readouterr().out)["diagnostics"]}
        assert rows["y"]["value"] == pytest.approx(0.146, abs=1e-3)
        assert rows["T1"]["severity"] == "not provided"
        assert rows["T1"]["value"] is None

    def test_amplitudes_and_energies(self, tmp_path, capsys):
        amplitudes = tmp_path / "t1.json"
        amplitudes.write_text(json.dumps({"rows": 1, "cols": 2, "values": [0.03, 0.04], "n_correlated": 1}))
        energies = tmp_path / "energies.json"
        energies.write_text(json.dumps({"tae_ccsd_t": 100.0, "tae_ccsd": 93.0}))
        assert main(["diag", "--amplitudes", str(amplitudes), "--energies", str(energies)]) == EXIT_OK
        rows = {row["diagnostic"]: row for row in json.loads(capsys.readouterr().out)["diagnostics"]}
        assert rows["T1"]["value"] == pytest.approx(0.05)
        assert rows["T1"]["severity"] == "severe"
        assert rows["D1"]["severity"] == "no-threshold"
        assert rows["%TAE[(T)]"]["value"] == pytest.approx(7.0)
        assert rows["%TAE[(T)]"]["severity"] == "moderate"
        assert rows["A_lambda"]["severity"] == "not provided"

    def test_energies_not_json(self, tmp_path):
        path = tmp_path / "energies.json"
        path.write_text("{not json")
        assert main(["diag", "--energies", str(path)]) == EXIT_ERROR

    def test_amplitudes_json_not_json(self, tmp_path):
        path = tmp_path / "t1.json"
        path.write_text("[1, 2")
        assert main(["diag", "--amplitudes", str(path)]) == EXIT_ERROR

    def test_amplitudes_csv_with_header(self, tmp_path):
        path = tmp_path / "t1.csv"
        path.write_text("a,b\n0.03,0.04\n")
        assert main(["diag", "--amplitudes", str(path), "--n-correlated", "2"]) == EXIT_ERROR

    def test_nothing_to_compute(self):
        assert main(["diag"]) == EXIT_ERROR

    def test_config_file(self, tmp_path, capsys):
        config = tmp_path / "diag.cfg"
        config.write_text("occupations = 1.0 1.0\nformat = csv\n")
        assert main(["diag", "--config", str(config)]) == EXIT_OK
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out), na_values=["undefined"])
        assert frame.set_index("diagnostic").loc["y", "value"] == pytest.approx(1.0)


class TestCorrCommand:

    def test_ethane_matrix(self, capsys):
        assert main(["corr", "--series", str(TABLES / "ethane_stretch.csv")]) == EXIT_OK
        rows = {row["series"]: row for row in json.loads(capsys.readouterr().out)["correlation"]}
        assert rows["%TAE[(T)]"]["APELE"] == pytest.approx(99.527, abs=0.5)

    def test_regression_and_trend_files(self, tmp_path):
        out = tmp_path / "small.csv"
        status = main(
            [
                "corr", "--series", str(TABLES / "small_molecules.csv"), "--format", "csv", "--output", str(out),
                "--regress", "x=N_u", "y=%TAE[(T)]",
                "--trend", "N_u", "%TAE[(T)]", "--pairs", "C2H2:CH2C",
            ]
        )
        assert status == EXIT_OK
        assert out.exists()
        regression = pd.read_csv(tmp_path / "small_regression.csv")
        assert regression["slope"][0] > 0.0
        trend = pd.read_csv(tmp_path / "small_trend.csv")
        assert bool(trend["agree"][0])

    def test_unknown_series(self):
        status = main(["corr", "--series", str(TABLES / "small_molecules.csv"), "--regress", "x=N_u", "y=T1"])
        assert status == EXIT_ERROR

    def test_missing_table(self, tmp_path):
        assert main(["corr", "--series", str(tmp_path / "absent.csv")]) == EXIT_ERROR


class TestDeltaCommand:

    def test_report_not_json(self, tmp_path):
        before = tmp_path / "before.json"
        before.write_text("{\"atoms\": ")
        assert main(["delta", "--before", str(before), "--after", str(before)]) == EXIT_ERROR

    def test_delta(self, tmp_path, capsys):
        def write(name, values):
            path = tmp_path / name
            atoms = [{"index": i + 1, "symbol": "H", "apele": v} for i, v in enumerate(values)]
            path.write_text(json.dumps({"atoms": atoms, "gross_ele": sum(values)}))
            return str(path)

        before = write("before.json", [0.1, 0.1])
        after = write("after.json", [0.4, 0.3])
        assert main(["delta", "--before", before, "--after", after, "--format", "csv"]) == EXIT_OK
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert list(frame["delta_apele"]) == pytest.approx([0.3, 0.2])


class TestConfigHelpers:

    def test_parse_grid(self):
        assert parse_grid("96x194") == (96, 194)

    @pytest.mark.parametrize("text", ["96", "4x302", "96x100", "axb"])
    def test_bad_grid(self, text):
        with pytest.raises(SchemaError):
            parse_grid(text)

    def test_grid_settings(self):
        settings = grid_settings("64x110", 4, True)
        assert (settings.n_radial, settings.n_angular, settings.becke_iterations, settings.size_adjustment) == (64, 110, 4, True)
        with pytest.raises(SchemaError):
            grid_settings("64x110", 0)

    def test_threads(self):
        assert resolve_threads(3) == 3
        assert resolve_threads(0) >= 1
        with pytest.raises(SchemaError):
            resolve_threads(-1)

    def test_config_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("wfx = a.wfx b.wfx\nsize-adjustment = yes\nthreads = 2\n")
        assert load_config_file(str(path)) == {"wfx": ["a.wfx", "b.wfx"], "size_adjustment": True, "threads": "2"}

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(MissingFile):
            load_config_file(str(tmp_path / "absent.cfg"))
