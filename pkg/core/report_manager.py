"""Report persistence: APELE reports, diagnostic tables and series files."""

import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from utils.constants import CORRELATION_PRECISION, OUTPUT_FORMATS, REPORT_PRECISION
from utils.file_utils import ensure_parent_dir, read_json
from .apele import ApeleReport
from .diagnostics import DiagnosticSeries, save_matrix_csv
from .errors import SchemaError

logger = logging.getLogger(__name__)


class ReportManager:
    """Writes reports in json, csv or text form to a file or to stdout."""

    def __init__(self, output_format: str = "json", precision: int = REPORT_PRECISION):
        if output_format not in OUTPUT_FORMATS:
            raise SchemaError("Unknown output format", format=output_format)
        self.output_format = output_format
        self.precision = precision

    # -- APELE reports -----------------------------------------------------

    def report_to_dict(self, report: ApeleReport) -> Dict[str, Any]:
        """Plain mapping of a report; key order is fixed."""
        return {
            "atoms": [
                {"index": i + 1, "symbol": symbol, "apele": value}
                for i, (symbol, value) in enumerate(zip(report.symbols, report.atom_populations))
            ],
            "gross_ele": report.gross_ele,
            "groups": dict(report.group_populations),
            "q_r": report.q_r,
            "q_r_group": report.q_r_group,
            "degraded": report.degraded,
            "provenance": report.provenance,
        }

    def report_from_dict(self, data: Dict[str, Any], source: str = "<report>") -> ApeleReport:
        try:
            atoms = sorted(data["atoms"], key=lambda atom: atom["index"])
            return ApeleReport(
                symbols=[atom["symbol"] for atom in atoms],
                atom_populations=[float(atom["apele"]) for atom in atoms],
                gross_ele=float(data["gross_ele"]),
                group_populations={k: float(v) for k, v in data.get("groups", {}).items()},
                q_r=data.get("q_r"),
                q_r_group=data.get("q_r_group"),
                provenance=data.get("provenance", {}),
                degraded=bool(data.get("degraded", False)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError("Malformed report", path=source, field=str(e)) from None

    def load_report(self, path: str) -> ApeleReport:
        """Read a JSON report written by ``save_report``."""
        return self.report_from_dict(read_json(path), source=path)

    def render_report(self, report: ApeleReport) -> str:
        if self.output_format == "json":
            return json.dumps(self.report_to_dict(report), indent=2) + "\n"
        if self.output_format == "csv":
            return self._report_frame(report).to_csv(index=False, float_format=f"%.{self.precision}f")
        return self._report_text(report)

    def save_report(self, report: ApeleReport, path: Optional[str] = None) -> None:
        """Write a report to ``path``, or to stdout when no path is given."""
        self._emit(self.render_report(report), path)

    def save_atom_csv(self, report: ApeleReport, path: str) -> None:
        ensure_parent_dir(path)
        self._report_frame(report).to_csv(path, index=False, float_format=f"%.{self.precision}f")
        logger.info("Wrote per-atom populations to %s", path)

    def _report_frame(self, report: ApeleReport) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "atom": list(range(1, report.n_atoms + 1)),
                "symbol": report.symbols,
                "apele": report.atom_populations,
            }
        )

    def _report_text(self, report: ApeleReport) -> str:
        p = self.precision
        lines = [f"{'Atom':<8}{'APELE':>{p + 8}}"]
        for label, value in zip(report.atom_labels(), report.atom_populations):
            lines.append(f"{label:<8}{value:>{p + 8}.{p}f}")
        lines.append(f"{'N_u':<8}{report.gross_ele:>{p + 8}.{p}f}")
        for name, value in report.group_populations.items():
            lines.append(f"{name:<8}{value:>{p + 8}.{p}f}")
        if report.q_r is not None:
            lines.append(f"Q_r[{report.q_r_group}] = {report.q_r:.{p}f}")
        if report.degraded:
            lines.append("DEGRADED: hole solver fell back on too many points")
        grid = report.provenance.get("grid")
        if grid:
            lines.append(f"grid {grid}, statuses {report.provenance.get('hole_statuses')}")
        return "\n".join(lines) + "\n"

    # -- Tables ------------------------------------------------------------

    def save_delta(self, symbols: Sequence[str], delta: Sequence[float], path: Optional[str] = None) -> None:
        frame = pd.DataFrame(
            {"atom": list(range(1, len(delta) + 1)), "symbol": list(symbols), "delta_apele": list(delta)}
        )
        self._emit_frame(frame, path, key="delta")

    def save_series(self, series: Sequence[DiagnosticSeries], path: str) -> None:
        """Series as a CSV table: tag column first, one column per series."""
        if not series:
            raise SchemaError("No series to write")
        tags = series[0].tags
        frame = pd.DataFrame({"tag": tags})
        for s in series:
            frame[s.name] = s.aligned(tags)
        ensure_parent_dir(path)
        frame.to_csv(path, index=False, float_format="%.10g")
        logger.info("Wrote %d series to %s", len(series), path)

    def save_correlations(self, matrix: pd.DataFrame, path: Optional[str] = None) -> None:
        if path and self.output_format == "csv":
            ensure_parent_dir(path)
            save_matrix_csv(matrix, path, CORRELATION_PRECISION)
            return
        self._emit_frame(matrix.reset_index().rename(columns={"index": "series"}), path, key="correlation", precision=CORRELATION_PRECISION)

    def save_rows(self, rows: List[Dict[str, Any]], path: Optional[str] = None, key: str = "rows") -> None:
        self._emit_frame(pd.DataFrame(rows), path, key=key)

    # -- Output ------------------------------------------------------------

    def _emit_frame(self, frame: pd.DataFrame, path: Optional[str], key: str, precision: Optional[int] = None) -> None:
        precision = self.precision if precision is None else precision
        if self.output_format == "json":
            records = json.loads(frame.to_json(orient="records", double_precision=15))
            text = json.dumps({key: records}, indent=2) + "\n"
        elif self.output_format == "csv":
            text = frame.to_csv(index=False, float_format=f"%.{precision}f", na_rep="undefined")
        else:
            text = frame.to_string(index=False, float_format=lambda v: f"{v:.{precision}f}", na_rep="undefined") + "\n"
        self._emit(text, path)

    def _emit(self, text: str, path: Optional[str]) -> None:
        if not path or path == "-":
            print(text, end="")
            return
        ensure_parent_dir(path)
        with open(path, "w") as f:
            f.write(text)
        logger.info("Wrote %s output to %s", self.output_format, os.path.abspath(path))
