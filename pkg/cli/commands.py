"""Subcommand drivers. Each returns the process exit status."""

import logging
import os
from typing import Any, Dict, List, Optional

from core.apele import (
    ApeleOptions,
    ApeleReport,
    compute_apele,
    group_apele,
    parse_group_definitions,
    report_delta,
    stretch_series,
)
from core.diagnostics import (
    a_lambda,
    classify,
    d1_diagnostic,
    linear_regression,
    load_amplitudes,
    load_energy_record,
    load_series_csv,
    pearson_matrix,
    percent_tae,
    regression_table,
    t1_d1_ratio,
    t1_diagnostic,
    trend_agreement,
    y_from_occupations,
    y_index,
)
from core.errors import SchemaError, UnknownClassForKind
from core.molecular_grid import build_grid, dump_grid_csv
from core.report_manager import ReportManager
from core.wavefunction import load_wfx, write_wfx
from utils.constants import EXIT_DEGRADED, EXIT_OK
from utils.file_utils import create_directories, ensure_parent_dir, output_path, require_files
from .config import RunConfig

logger = logging.getLogger(__name__)

NOT_PROVIDED = "not provided"
EXTENSIONS = {"json": "json", "csv": "csv", "text": "txt"}


# ---------------------------------------------------------------------------
# apele
# ---------------------------------------------------------------------------

def _apele_report(config: RunConfig, path: str) -> ApeleReport:
    wfn = load_wfx(path, normalized_primitives=not config.raw_primitives)
    if config.dump_wfx:
        ensure_parent_dir(config.dump_wfx)
        with open(config.dump_wfx, "w") as f:
            f.write(write_wfx(wfn))
        logger.info("Wrote wavefunction to %s", config.dump_wfx)

    options = ApeleOptions(
        threads=config.threads,
        exchange_path=config.exchange_path,
        field_dump_path=config.dump_fields,
        hole_dump_path=config.dump_holes,
    )
    report = compute_apele(wfn, config.grid, options)
    if config.groups:
        report = group_apele(report, parse_group_definitions(config.groups), config.qr_group)
    elif config.qr_group:
        raise SchemaError("--qr-group needs --groups", group=config.qr_group)
    return report


def run_apele(config: RunConfig) -> int:
    """APELE report per input; several inputs also give a stretch series."""
    require_files(*config.input_files())
    manager = ReportManager(config.output_format)
    reports: List[ApeleReport] = []

    if len(config.inputs) == 1:
        report = _apele_report(config, config.inputs[0])
        manager.save_report(report, config.output_path)
        if config.atom_csv:
            manager.save_atom_csv(report, config.atom_csv)
        reports.append(report)
    else:
        if config.dump_wfx or config.dump_fields or config.dump_holes or config.exchange_path:
            raise SchemaError("Dump and exchange files apply to a single --wfx input")
        directory = config.output_path
        if directory:
            create_directories(directory)
        for path in config.inputs:
            report = _apele_report(config, path)
            manager.save_report(report, output_path(directory, path, EXTENSIONS[config.output_format]) if directory else None)
            reports.append(report)

    if config.series_out:
        tags = config.tags or tuple(os.path.splitext(os.path.basename(p))[0] for p in config.inputs)
        atom_series, gross_series = stretch_series(reports, tags, config.series_atom - 1)
        manager.save_series([atom_series, gross_series], config.series_out)

    return EXIT_DEGRADED if any(r.degraded for r in reports) else EXIT_OK


# ---------------------------------------------------------------------------
# diag
# ---------------------------------------------------------------------------

def _severity(kind: str, value: float, element_class: str) -> str:
    try:
        return classify(kind, value, element_class)
    except UnknownClassForKind:
        return "no-threshold"


def diagnostic_rows(config: RunConfig) -> List[Dict[str, Any]]:
    """Every diagnostic the inputs allow; missing inputs yield 'not provided' rows."""
    rows: List[Dict[str, Any]] = []

    def add(kind: str, value: Optional[float], severity: Optional[str] = None) -> None:
        rows.append({"diagnostic": kind, "value": value, "severity": severity if value is not None else NOT_PROVIDED})

    if config.amplitudes:
        amps = load_amplitudes(config.amplitudes, config.n_correlated)
        t1 = t1_diagnostic(amps)
        d1 = d1_diagnostic(amps)
        add("T1", t1, _severity("T1", t1, config.element_class))
        add("D1", d1, _severity("D1", d1, config.element_class))
        add("T1/D1", t1_d1_ratio(t1, d1) if d1 > 0.0 else None, "")
    else:
        for kind in ("T1", "D1", "T1/D1"):
            add(kind, None)

    record = load_energy_record(config.energies) if config.energies else None
    if record is not None and record.tae_ccsd_t is not None and record.tae_ccsd is not None:
        value = percent_tae(record)
        add("%TAE[(T)]", value, _severity("%TAE[(T)]", value, config.element_class))
    else:
        add("%TAE[(T)]", None)
    if record is not None and None not in (record.tae_hybrid, record.tae_hf100, record.lam):
        value = a_lambda(record)
        add("A_lambda", value, _severity("A_lambda", value, config.element_class))
    else:
        add("A_lambda", None)

    if config.overlap is not None:
        add("y", y_index(config.overlap), "")
    elif config.occupations is not None:
        add("y", y_from_occupations(*config.occupations), "")
    else:
        add("y", None)
    return rows


def run_diag(config: RunConfig) -> int:
    if not (config.amplitudes or config.energies or config.occupations or config.overlap is not None):
        raise SchemaError("Provide at least one of --amplitudes, --energies, --occupations, --overlap")
    require_files(*config.input_files())
    ReportManager(config.output_format).save_rows(diagnostic_rows(config), config.output_path, key="diagnostics")
    return EXIT_OK


# ---------------------------------------------------------------------------
# corr
# ---------------------------------------------------------------------------

def _parse_regress(tokens) -> Dict[str, List[str]]:
    parsed: Dict[str, List[str]] = {"x": [], "y": []}
    for token in tokens:
        axis, sep, name = token.partition("=")
        if not sep or axis not in parsed or not name:
            raise SchemaError("Regression terms are written x=NAME or y=NAME", term=token)
        parsed[axis].append(name)
    if len(parsed["x"]) != 1 or not parsed["y"]:
        raise SchemaError("Regression needs one x series and at least one y series")
    return parsed


def run_corr(config: RunConfig) -> int:
    """Correlation matrix of a series table, plus optional regressions and trend checks."""
    require_files(*config.input_files())
    series = load_series_csv(config.series_csv)
    by_name = {s.name: s for s in series}

    def lookup(name: str):
        if name not in by_name:
            raise SchemaError("Unknown series", series=name, available=",".join(by_name))
        return by_name[name]

    manager = ReportManager(config.output_format)
    manager.save_correlations(pearson_matrix(series), config.output_path)

    stem = config.output_path and os.path.splitext(config.output_path)[0]
    extension = EXTENSIONS[config.output_format]
    if config.regress:
        terms = _parse_regress(config.regress)
        x = lookup(terms["x"][0])
        ys = [lookup(name) for name in terms["y"]]
        if len(ys) == 1:
            fit = linear_regression(x, ys[0])
            rows = [{"series": ys[0].name, "intercept": fit.intercept, "slope": fit.slope, "correlation": fit.correlation}]
        else:
            rows = regression_table(x, ys).to_dict(orient="records")
        manager.save_rows(rows, f"{stem}_regression.{extension}" if stem else None, key="regression")

    if config.trend:
        if not config.pairs:
            raise SchemaError("--trend needs --pairs TAG1:TAG2")
        pairs = []
        for token in config.pairs:
            first, sep, second = token.partition(":")
            if not sep:
                raise SchemaError("Pairs are written TAG1:TAG2", pair=token)
            pairs.append((first, second))
        a, b = lookup(config.trend[0]), lookup(config.trend[1])
        rows = [{"first": f, "second": s, "agree": agree} for f, s, agree in trend_agreement(a, b, pairs)]
        manager.save_rows(rows, f"{stem}_trend.{extension}" if stem else None, key="trend")
    return EXIT_OK


# ---------------------------------------------------------------------------
# grid-dump and delta
# ---------------------------------------------------------------------------

def run_grid_dump(config: RunConfig) -> int:
    require_files(*config.input_files())
    wfn = load_wfx(config.inputs[0], normalized_primitives=not config.raw_primitives)
    grid = build_grid(wfn.nuclei, config.grid, config.threads)
    ensure_parent_dir(config.output_path)
    dump_grid_csv(grid, config.output_path)
    return EXIT_OK


def run_delta(config: RunConfig) -> int:
    """Per-atom APELE after - before for two reports of the same molecule."""
    require_files(*config.input_files())
    manager = ReportManager(config.output_format)
    before = manager.load_report(config.before)
    after = manager.load_report(config.after)
    manager.save_delta(before.symbols, report_delta(before, after), config.output_path)
    return EXIT_OK


COMMANDS = {
    "apele": run_apele,
    "diag": run_diag,
    "corr": run_corr,
    "grid-dump": run_grid_dump,
    "delta": run_delta,
}
