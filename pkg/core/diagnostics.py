"""Nondynamic-correlation diagnostics and the statistics that compare them."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, stats

from utils.constants import (
    A_LAMBDA_BANDS,
    D1_THRESHOLDS,
    ELEMENT_CLASSES,
    PERCENT_TAE_BANDS,
    T1_THRESHOLDS,
)
from utils.file_utils import read_json
from .errors import (
    ConstantPredictor,
    ConstantSeries,
    DivisionByZeroDomain,
    EmptyMatrix,
    InvariantViolation,
    LambdaOutOfRange,
    OutOfRange,
    SchemaError,
    TagMismatch,
    UnknownClassForKind,
    UnknownKind,
    ZeroDenominator,
)

logger = logging.getLogger(__name__)

# Canonical kind names and the spellings accepted for them
KIND_ALIASES = {
    "t1": "T1",
    "d1": "D1",
    "%tae": "%TAE[(T)]",
    "%tae[(t)]": "%TAE[(T)]",
    "percent_tae": "%TAE[(T)]",
    "a_lambda": "A_lambda",
    "alambda": "A_lambda",
}


@dataclass(frozen=True)
class DiagnosticSeries:
    name: str
    points: Tuple[Tuple[str, float], ...]

    def __post_init__(self):
        tags = [tag for tag, _ in self.points]
        if len(set(tags)) != len(tags):
            duplicates = sorted({t for t in tags if tags.count(t) > 1})
            raise InvariantViolation("Series tags must be unique", series=self.name, tags=",".join(duplicates))

    @classmethod
    def from_values(cls, name: str, tags: Iterable, values: Iterable[float]) -> "DiagnosticSeries":
        return cls(name, tuple((str(tag), float(value)) for tag, value in zip(tags, values)))

    @property
    def tags(self) -> List[str]:
        return [tag for tag, _ in self.points]

    @property
    def values(self) -> np.ndarray:
        return np.array([value for _, value in self.points], dtype=float)

    def value_map(self) -> Dict[str, float]:
        return dict(self.points)

    def aligned(self, tags: Sequence[str]) -> np.ndarray:
        """Values in the order of ``tags``, which must be this series' tag set."""
        lookup = self.value_map()
        if set(tags) != set(lookup):
            missing = sorted(set(tags) ^ set(lookup))
            raise TagMismatch("Series do not share tags", series=self.name, tags=",".join(missing))
        return np.array([lookup[t] for t in tags], dtype=float)


@dataclass(frozen=True)
class EnergyRecord:
    """Atomization energies in one unit; any field may be absent."""

    tae_ccsd_t: Optional[float] = None
    tae_ccsd: Optional[float] = None
    tae_hybrid: Optional[float] = None
    tae_hf100: Optional[float] = None
    lam: Optional[float] = None
    unit: str = "kcal/mol"


@dataclass(frozen=True)
class AmplitudeData:
    t1_matrix: np.ndarray
    n_correlated: int


@dataclass(frozen=True)
class RegressionResult:
    intercept: float
    slope: float
    correlation: float


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def _amplitude_matrix(amps: AmplitudeData) -> np.ndarray:
    matrix = np.atleast_2d(np.asarray(amps.t1_matrix, dtype=float))
    if matrix.size == 0:
        raise EmptyMatrix("Singles amplitude matrix is empty")
    return matrix


def t1_diagnostic(amps: AmplitudeData) -> float:
    """Frobenius norm of the singles amplitudes over sqrt(correlated electrons)."""
    matrix = _amplitude_matrix(amps)
    if amps.n_correlated <= 0:
        raise OutOfRange("Correlated electron count must be positive", n_correlated=amps.n_correlated)
    return float(np.linalg.norm(matrix.ravel()) / math.sqrt(amps.n_correlated))


def d1_diagnostic(amps: AmplitudeData) -> float:
    """Largest singular value of the singles amplitude matrix."""
    matrix = _amplitude_matrix(amps)
    return float(linalg.svdvals(matrix)[0])


def t1_d1_ratio(t1: float, d1: float) -> float:
    if d1 <= 0.0:
        raise DivisionByZeroDomain("D1 must be positive for the T1/D1 ratio", d1=d1)
    return t1 / d1


def percent_tae(record: EnergyRecord) -> float:
    """Share of the atomization energy coming from perturbative triples, in %."""
    if record.tae_ccsd_t is None or record.tae_ccsd is None:
        raise SchemaError("Energy record lacks CCSD(T) or CCSD atomization energy")
    if record.tae_ccsd_t == 0.0:
        raise ZeroDenominator("CCSD(T) atomization energy is zero")
    return 100.0 * (record.tae_ccsd_t - record.tae_ccsd) / record.tae_ccsd_t


def a_lambda(record: EnergyRecord) -> float:
    """Energy-based index from hybrid and full exact-exchange atomization energies."""
    if record.tae_hybrid is None or record.tae_hf100 is None or record.lam is None:
        raise SchemaError("Energy record lacks hybrid, exact-exchange or lambda entries")
    if not 0.0 < record.lam <= 1.0:
        raise LambdaOutOfRange("Exact-exchange fraction must lie in (0, 1]", lam=record.lam)
    if record.tae_hf100 == 0.0:
        raise ZeroDenominator("Exact-exchange atomization energy is zero")
    return (1.0 - record.tae_hybrid / record.tae_hf100) / record.lam


def y_index(overlap: float) -> float:
    """Diradical character 1 - 2T / (1 + T^2) from the HOMO-LUMO overlap T."""
    if not 0.0 <= overlap <= 1.0:
        raise OutOfRange("Orbital overlap must lie in [0, 1]", overlap=overlap)
    return 1.0 - 2.0 * overlap / (1.0 + overlap * overlap)


def y_from_occupations(n_homo: float, n_lumo: float) -> float:
    """Diradical character from natural occupations, T = (n_homo - n_lumo) / 2."""
    for name, value in (("n_homo", n_homo), ("n_lumo", n_lumo)):
        if not 0.0 <= value <= 2.0:
            raise OutOfRange("Occupation must lie in [0, 2]", **{name: value})
    if n_homo < n_lumo:
        raise OutOfRange("HOMO occupation below LUMO occupation", n_homo=n_homo, n_lumo=n_lumo)
    return y_index((n_homo - n_lumo) / 2.0)


def canonical_kind(kind: str) -> str:
    key = kind.strip().lower()
    if key in KIND_ALIASES:
        return KIND_ALIASES[key]
    # Functional-specific labels such as A_lambda[M06]
    if key.startswith("a_lambda["):
        return "A_lambda"
    raise UnknownKind("Unknown diagnostic kind", kind=kind)


def classify(kind: str, value: float, element_class: str = "organic") -> str:
    """Severity label of a diagnostic value against the published thresholds."""
    name = canonical_kind(kind)
    if name == "T1":
        if element_class not in T1_THRESHOLDS:
            raise UnknownClassForKind("No T1 threshold for class", kind=name, element_class=element_class)
        return "severe" if value > T1_THRESHOLDS[element_class] else "acceptable"
    if name == "D1":
        if element_class not in D1_THRESHOLDS:
            raise UnknownClassForKind("No D1 threshold for class", kind=name, element_class=element_class)
        limit = D1_THRESHOLDS[element_class]
        exceeded = value >= limit if element_class == "4d" else value > limit
        return "severe" if exceeded else "acceptable"
    if element_class not in ELEMENT_CLASSES:
        raise UnknownClassForKind("Unknown element class", kind=name, element_class=element_class)
    if name == "%TAE[(T)]":
        mild, moderate = PERCENT_TAE_BANDS
        if value < mild:
            return "mild"
        return "moderate" if value <= moderate else "severe"
    dynamic, mild, moderate = A_LAMBDA_BANDS
    if value < dynamic:
        return "dynamic-dominated"
    if value < mild:
        return "mild"
    return "moderate" if value <= moderate else "strong"


# ---------------------------------------------------------------------------
# Correlation and regression
# ---------------------------------------------------------------------------

def _is_constant(values: np.ndarray) -> bool:
    return bool(np.ptp(values) == 0.0)


def pearson_correlation(a: DiagnosticSeries, b: DiagnosticSeries) -> float:
    """Pearson correlation of two series over their shared tags, in percent."""
    tags = a.tags
    xa, xb = a.aligned(tags), b.aligned(tags)
    if len(tags) < 2:
        raise SchemaError("At least two tags are needed for a correlation", series=a.name)
    for name, values in ((a.name, xa), (b.name, xb)):
        if _is_constant(values):
            raise ConstantSeries("Correlation with a constant series is undefined", series=name)
    if a is b:
        return 100.0
    return 100.0 * float(stats.pearsonr(xa, xb)[0])


def pearson_matrix(series: Sequence[DiagnosticSeries]) -> pd.DataFrame:
    """Pairwise Pearson correlations in percent; undefined pairs are NaN."""
    if not series:
        raise SchemaError("No series to correlate")
    names = [s.name for s in series]
    matrix = np.full((len(series), len(series)), np.nan)
    for i in range(len(series)):
        for j in range(i + 1):
            try:
                matrix[i, j] = matrix[j, i] = pearson_correlation(series[i], series[j])
            except ConstantSeries as e:
                if i == j:
                    logger.warning("%s", e)
    return pd.DataFrame(matrix, index=names, columns=names)


def linear_regression(x: DiagnosticSeries, y: DiagnosticSeries) -> RegressionResult:
    """Least-squares y = intercept + slope x with the Pearson coefficient."""
    tags = x.tags
    xs = x.aligned(tags)
    ys = y.aligned(tags)
    if len(xs) < 2:
        raise SchemaError("At least two points are needed for a regression", series=x.name)
    if _is_constant(xs):
        raise ConstantPredictor("Predictor series is constant", series=x.name)
    fit = stats.linregress(xs, ys)
    correlation = float(fit.rvalue) if not _is_constant(ys) else float("nan")
    return RegressionResult(float(fit.intercept), float(fit.slope), correlation)


def regression_table(x: DiagnosticSeries, ys: Sequence[DiagnosticSeries]) -> pd.DataFrame:
    """One regression row per dependent series against a shared benchmark."""
    rows = []
    for y in ys:
        fit = linear_regression(x, y)
        rows.append({"series": y.name, "intercept": fit.intercept, "slope": fit.slope, "correlation": fit.correlation})
    return pd.DataFrame(rows, columns=["series", "intercept", "slope", "correlation"])


def trend_agreement(
    a: DiagnosticSeries, b: DiagnosticSeries, pairs: Sequence[Tuple[str, str]]
) -> List[Tuple[str, str, bool]]:
    """Whether both series order each tag pair the same way."""
    va, vb = a.value_map(), b.value_map()
    results = []
    for first, second in pairs:
        for tag in (first, second):
            if tag not in va or tag not in vb:
                raise TagMismatch("Pair tag missing from a series", tag=tag)
        same = np.sign(va[first] - va[second]) == np.sign(vb[first] - vb[second])
        results.append((first, second, bool(same)))
    return results


# ---------------------------------------------------------------------------
# Ingest and emit
# ---------------------------------------------------------------------------

def load_series_csv(path: str) -> List[DiagnosticSeries]:
    """Series table: first column holds tags, every other column is a series."""
    try:
        frame = pd.read_csv(path, dtype=str)
    except ValueError:
        raise SchemaError("Unreadable series table", path=path) from None
    if frame.shape[1] < 2:
        raise SchemaError("Series file needs a tag column and at least one series", path=path)
    tags = frame.iloc[:, 0].astype(str).str.strip().tolist()
    series = []
    for column in frame.columns[1:]:
        values = pd.to_numeric(frame[column], errors="coerce")
        if values.isna().any():
            row = int(values.isna().to_numpy().argmax()) + 2
            raise SchemaError("Non-numeric series value", path=path, column=column, row=row)
        series.append(DiagnosticSeries.from_values(str(column).strip(), tags, values))
    logger.info("Loaded %d series over %d tags from %s", len(series), len(tags), path)
    return series


def save_matrix_csv(matrix: pd.DataFrame, path: str, precision: int = 3) -> None:
    matrix.round(precision).to_csv(path, na_rep="undefined")
    logger.info("Wrote matrix to %s", path)


def load_amplitudes(path: str, n_correlated: Optional[int] = None) -> AmplitudeData:
    """Singles amplitudes from a headerless CSV matrix or a JSON record.

    JSON records carry ``rows``, ``cols``, ``values`` (row-major) and
    ``n_correlated``; for CSV input the count comes from the caller.
    """
    if path.lower().endswith(".json"):
        record = read_json(path)
        if not isinstance(record, dict):
            raise SchemaError("Amplitude record must be a JSON object", path=path)
        for key in ("rows", "cols", "values", "n_correlated"):
            if key not in record:
                raise SchemaError("Amplitude record lacks a field", path=path, field=key)
        values = np.asarray(record["values"], dtype=float)
        if values.size != record["rows"] * record["cols"]:
            raise SchemaError("Amplitude values do not fill rows x cols", path=path, field="values")
        return AmplitudeData(values.reshape(record["rows"], record["cols"]), int(record["n_correlated"]))

    if n_correlated is None:
        raise SchemaError("CSV amplitudes need the correlated electron count", path=path, field="n_correlated")
    try:
        matrix = pd.read_csv(path, header=None).to_numpy(dtype=float)
    except ValueError:
        raise SchemaError("Amplitude CSV must hold numbers only", path=path) from None
    return AmplitudeData(matrix, int(n_correlated))


ENERGY_FIELDS = ("tae_ccsd_t", "tae_ccsd", "tae_hybrid", "tae_hf100", "lambda")


def load_energy_record(path: str) -> EnergyRecord:
    """Atomization energies from a JSON object; unknown keys are rejected."""
    record = read_json(path)
    if not isinstance(record, dict):
        raise SchemaError("Energy record must be a JSON object", path=path)
    unknown = sorted(set(record) - set(ENERGY_FIELDS) - {"unit"})
    if unknown:
        raise SchemaError("Unknown energy record fields", path=path, field=",".join(unknown))

    values = {}
    for key in ENERGY_FIELDS:
        if record.get(key) is None:
            continue
        try:
            values[key] = float(record[key])
        except (TypeError, ValueError):
            raise SchemaError("Energy value is not a number", path=path, field=key) from None
    return EnergyRecord(
        tae_ccsd_t=values.get("tae_ccsd_t"),
        tae_ccsd=values.get("tae_ccsd"),
        tae_hybrid=values.get("tae_hybrid"),
        tae_hf100=values.get("tae_hf100"),
        lam=values.get("lambda"),
        unit=str(record.get("unit", "kcal/mol")),
    )
