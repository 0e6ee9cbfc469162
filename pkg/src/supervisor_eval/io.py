"""Score/feature CSV ingestion, case manifests, and report serialization.

Score CSV: UTF-8, LF newlines, header ``sample_id,anomaly_score`` with an
optional ``prediction_correct`` column holding ``true``/``false``.
Feature CSV: header ``sample_id,f0,f1,...`` with the same optional column.
Floats are written with ``repr`` and read with ``float`` so values round-trip
exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

import jsonschema
import numpy as np

from . import __version__
from .core import (
    METRIC_COLUMNS,
    Curve,
    CurveKind,
    DuplicateId,
    EvaluationError,
    MetricsReport,
    NonFiniteScore,
    ScoreDistribution,
    ScoredSample,
)
from .supervisors import FeatureMatrix
from .synth import GaussianCaseSpec

PathLike = Union[str, Path]
REPORT_FORMAT = "supervisor-eval-report/1"
REPORT_NAME = "report.json"
TABLE_NAME = "table.csv"
TABLE_HEADER = ("Supervisor", "Case") + METRIC_COLUMNS


class ParseError(EvaluationError):
    def __init__(self, message: str, path: Optional[PathLike] = None, line: Optional[int] = None):
        self.path = None if path is None else str(path)
        self.line = line
        where = ":".join(str(p) for p in (self.path, line) if p is not None)
        super().__init__(f"{where}: {message}" if where else message)


class SchemaError(EvaluationError):
    def __init__(self, message: str, path: str = "$", source: Optional[PathLike] = None):
        self.path = path
        self.source = None if source is None else str(source)
        prefix = f"{self.source}: " if self.source else ""
        super().__init__(f"{prefix}{path}: {message}")


def _schema(name: str) -> dict:
    text = resources.files("supervisor_eval").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


MANIFEST_SCHEMA = _schema("manifest.schema.json")
REPORT_SCHEMA = _schema("report.schema.json")


def validate_document(doc: Any, schema: dict, source: Optional[PathLike]) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        path = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
        raise SchemaError(err.message, path, source)


# -- CSV ---------------------------------------------------------------------

_BOOL = {"true": True, "false": False}


def _parse_bool(text: str, path, line: int) -> bool:
    try:
        return _BOOL[text.strip().lower()]
    except KeyError:
        raise ParseError(f"prediction_correct must be true or false, got {text!r}", path, line) from None


def _parse_float(text: str, column: str, path, line: int, sample_id: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{column} is not a number: {text!r}", path, line) from None
    if not math.isfinite(value):
        raise NonFiniteScore(f"{path}:{line}: non-finite {column} for sample {sample_id!r}")
    return value


def _open_csv(path: PathLike):
    path = Path(path)
    if not path.is_file():
        raise ParseError("file not found", path)
    fh = path.open(newline="", encoding="utf-8")
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        fh.close()
        raise ParseError("empty file, expected a header", path, 1) from None
    return fh, reader, header


def read_score_csv(path: PathLike, is_outlier: bool) -> list[ScoredSample]:
    """Parse a score file into samples, all labelled ``is_outlier``."""
    fh, reader, header = _open_csv(path)
    with fh:
        for col in ("sample_id", "anomaly_score"):
            if col not in header:
                raise ParseError(f"header lacks required column {col!r}", path, 1)
        extra = set(header) - {"sample_id", "anomaly_score", "prediction_correct"}
        if extra or len(set(header)) != len(header):
            raise ParseError(f"unexpected header {','.join(header)!r}", path, 1)
        i_id, i_score = header.index("sample_id"), header.index("anomaly_score")
        i_flag = header.index("prediction_correct") if "prediction_correct" in header else None
        out = []
        seen: set[str] = set()
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, line)
            sid = row[i_id]
            if sid in seen:
                raise DuplicateId(f"{path}:{line}: duplicate sample_id {sid!r}")
            seen.add(sid)
            score = _parse_float(row[i_score], "anomaly_score", path, line, sid)
            flag = None if i_flag is None else _parse_bool(row[i_flag], path, line)
            out.append(ScoredSample(sid, score, is_outlier, flag))
    return out


def write_score_csv(samples: Iterable[ScoredSample], path: PathLike, with_correctness: Optional[bool] = None) -> None:
    """Write samples in score-file format.

    The correctness column is written when ``with_correctness`` is true, or by
    default when every sample carries a flag.
    """
    samples = list(samples)
    if with_correctness is None:
        with_correctness = bool(samples) and all(s.prediction_correct is not None for s in samples)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_id", "anomaly_score"] + (["prediction_correct"] if with_correctness else []))
        for s in samples:
            row = [s.sample_id, repr(float(s.anomaly_score))]
            if with_correctness:
                row.append("true" if s.prediction_correct else "false")
            w.writerow(row)


def read_feature_csv(path: PathLike) -> tuple[FeatureMatrix, Optional[list[bool]]]:
    """Parse a feature file; returns the matrix and correctness flags if present."""
    fh, reader, header = _open_csv(path)
    with fh:
        if not header or header[0] != "sample_id":
            raise ParseError("first header column must be 'sample_id'", path, 1)
        i_flag = header.index("prediction_correct") if "prediction_correct" in header else None
        feat_cols = [i for i in range(1, len(header)) if i != i_flag]
        if not feat_cols:
            raise ParseError("no feature columns", path, 1)
        ids, rows, flags = [], [], []
        seen: set[str] = set()
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, line)
            sid = row[0]
            if sid in seen:
                raise DuplicateId(f"{path}:{line}: duplicate sample_id {sid!r}")
            seen.add(sid)
            ids.append(sid)
            rows.append([_parse_float(row[i], header[i], path, line, sid) for i in feat_cols])
            if i_flag is not None:
                flags.append(_parse_bool(row[i_flag], path, line))
    if not rows:
        raise ParseError("no data rows", path)
    return FeatureMatrix(np.array(rows), tuple(ids)), (flags if i_flag is not None else None)


def write_feature_csv(
    features: FeatureMatrix, path: PathLike, correctness: Optional[Sequence[bool]] = None
) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            ["sample_id"]
            + [f"f{j}" for j in range(features.n_cols)]
            + (["prediction_correct"] if correctness is not None else [])
        )
        for i, sid in enumerate(features.row_ids):
            row = [sid] + [repr(v) for v in features.values[i].tolist()]
            if correctness is not None:
                row.append("true" if correctness[i] else "false")
            w.writerow(row)


# -- manifests -----------------------------------------------------------------

INPUT_VARIANTS = ("score_files", "features", "synthetic")


@dataclass(frozen=True)
class CaseManifest:
    case_name: str
    supervisor_name: str
    model_id: str
    inputs: dict
    input_kind: str
    baseline_accuracy: Optional[float] = None
    bin_count: int = 50
    output_dir: Optional[Path] = None
    base_dir: Path = field(default_factory=Path)
    sha256: Optional[str] = None
    source: Optional[Path] = None

    def resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p

    def input_paths(self) -> list[Path]:
        if self.input_kind == "synthetic":
            return []
        return [self.resolve(v) for k, v in sorted(self.inputs.items()) if k in ("train", "inliers", "outliers")]

    @property
    def gaussian_spec(self) -> GaussianCaseSpec:
        return GaussianCaseSpec(**self.inputs["spec"])


def parse_manifest(doc: Any, base_dir: PathLike = ".", source: Optional[PathLike] = None) -> CaseManifest:
    if not isinstance(doc, dict):
        raise SchemaError("manifest must be a JSON object", "$", source)
    present = [k for k in INPUT_VARIANTS if k in doc]
    if len(present) != 1:
        what = "none" if not present else " and ".join(present)
        raise SchemaError(
            f"exactly one of {', '.join(INPUT_VARIANTS)} is required, found {what}", "$", source
        )
    validate_document(doc, MANIFEST_SCHEMA, source)
    kind = present[0]
    inputs = dict(doc[kind])
    if kind == "synthetic":
        try:
            GaussianCaseSpec(**inputs["spec"])
        except EvaluationError as exc:
            raise SchemaError(str(exc), "$.synthetic.spec", source) from None
    if kind == "features" and inputs["rule"] in ("gaussian_nll", "knn", "linear_recon") and "train" not in inputs:
        raise SchemaError(f"rule {inputs['rule']!r} needs a 'train' feature file", "$.features", source)
    base_dir = Path(base_dir)
    out = doc.get("output_dir")
    return CaseManifest(
        case_name=doc["case_name"],
        supervisor_name=doc["supervisor_name"],
        model_id=doc["model_id"],
        inputs=inputs,
        input_kind=kind,
        baseline_accuracy=doc.get("baseline_accuracy"),
        bin_count=doc.get("bin_count", 50),
        output_dir=None if out is None else (Path(out) if Path(out).is_absolute() else base_dir / out),
        base_dir=base_dir,
        source=None if source is None else Path(source),
    )


def read_manifest(path: PathLike) -> CaseManifest:
    path = Path(path)
    if not path.is_file():
        raise SchemaError("manifest file not found", "$", path)
    raw = path.read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"invalid JSON: {exc}", "$", path) from None
    m = parse_manifest(doc, path.parent, path)
    return CaseManifest(**{**m.__dict__, "sha256": hashlib.sha256(raw).hexdigest()})


# -- report JSON -------------------------------------------------------------


def _num(x: float) -> str:
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("bool is not a number here")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x) and x > 0:
        return '"+inf"'
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize {x!r}")
    return format(x, ".17g")


def _dumps(obj: Any, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dumps(v, indent + 1) for v in obj) + "]"
    if obj is None or isinstance(obj, (bool, np.bool_, str)):
        return json.dumps(obj if not isinstance(obj, np.bool_) else bool(obj))
    return _num(obj)


def _curve_doc(c: Optional[Curve]):
    if c is None:
        return None
    return {"kind": c.kind.value, "x": c.x, "y": c.y, "t": c.t}


def report_to_dict(
    report: MetricsReport,
    manifest_sha256: Optional[str] = None,
    timestamp: Optional[str] = None,
) -> dict:
    d = report.distribution
    return {
        "format": REPORT_FORMAT,
        "tool_version": __version__,
        "manifest_sha256": manifest_sha256,
        "timestamp": timestamp,
        "case_name": report.case_name,
        "supervisor_name": report.supervisor_name,
        "model_id": report.model_id,
        "baseline_accuracy": report.baseline_accuracy,
        "sample_counts": {"inliers": report.n_inliers, "outliers": report.n_outliers},
        "metrics": report.scalars(),
        "risk_at_min_coverage": report.risk_at_min_coverage,
        "curves": {
            "roc": _curve_doc(report.roc),
            "pr": _curve_doc(report.pr),
            "risk_coverage": _curve_doc(report.risk_coverage),
        },
        "distribution": {
            "bin_edges": d.bin_edges,
            "inlier_counts": d.inlier_counts,
            "outlier_counts": d.outlier_counts,
            "degenerate": d.degenerate,
        },
    }


def dumps_report(report: MetricsReport, manifest_sha256=None, timestamp=None) -> str:
    return _dumps(report_to_dict(report, manifest_sha256, timestamp)) + "\n"


def _curve_from(doc, source) -> Optional[Curve]:
    if doc is None:
        return None
    n = len(doc["x"])
    if not (len(doc["y"]) == len(doc["t"]) == n):
        raise SchemaError("curve arrays differ in length", f"$.curves.{doc['kind']}", source)
    try:
        x = np.array(doc["x"], dtype=np.float64)
        y = np.array(doc["y"], dtype=np.float64)
        t = np.array([math.inf if v == "+inf" else v for v in doc["t"]], dtype=np.float64)
    except (TypeError, ValueError):
        raise SchemaError("curve arrays must hold numbers", f"$.curves.{doc['kind']}", source) from None
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise SchemaError("curve coordinates must be finite", f"$.curves.{doc['kind']}", source)
    return Curve(CurveKind(doc["kind"]), x, y, t)


def _opt_float(v):
    return None if v is None else float(v)


def report_from_dict(doc: Any, source: Optional[PathLike] = None) -> tuple[MetricsReport, dict]:
    """Validate a report document; returns the report and its provenance fields."""
    validate_document(doc, REPORT_SCHEMA, source)
    m = doc["metrics"]
    dist = doc["distribution"]
    curves = doc["curves"]
    report = MetricsReport(
        case_name=doc["case_name"],
        supervisor_name=doc["supervisor_name"],
        auroc=float(m["AUROC"]),
        auprc=float(m["AUPRC"]),
        tpr05=float(m["TPR05"]),
        p95=float(m["P95"]),
        fnr95=float(m["FNR95"]),
        cbpl=_opt_float(m["CBPL"]),
        cbfad=float(m["CBFAD"]),
        roc=_curve_from(curves["roc"], source),
        pr=_curve_from(curves["pr"], source),
        distribution=ScoreDistribution(
            np.array(dist["bin_edges"], dtype=np.float64),
            dist["inlier_counts"],
            dist["outlier_counts"],
            dist["degenerate"],
        ),
        n_inliers=doc["sample_counts"]["inliers"],
        n_outliers=doc["sample_counts"]["outliers"],
        risk_coverage=_curve_from(curves["risk_coverage"], source),
        risk_at_min_coverage=_opt_float(doc["risk_at_min_coverage"]),
        baseline_accuracy=_opt_float(doc["baseline_accuracy"]),
        model_id=doc["model_id"],
    )
    prov = {k: doc[k] for k in ("format", "tool_version", "manifest_sha256", "timestamp")}
    return report, prov


def read_report(path: PathLike) -> tuple[MetricsReport, dict]:
    path = Path(path)
    if path.is_dir():
        path = path / REPORT_NAME
    if not path.is_file():
        raise SchemaError("report file not found", "$", path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"invalid JSON: {exc}", "$", path) from None
    return report_from_dict(doc, path)


def _cell(v: Optional[float]) -> str:
    return "N/A" if v is None else repr(float(v))


def table_rows(reports: Iterable[MetricsReport]) -> list[list[str]]:
    rows = []
    for r in reports:
        rows.append([r.supervisor_name, r.case_name] + [_cell(v) for v in r.scalars().values()])
    return rows


def format_table(reports: Iterable[MetricsReport]) -> str:
    import io as _stdio

    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_HEADER)
    w.writerows(table_rows(reports))
    return buf.getvalue()


def write_table(reports: Iterable[MetricsReport], path: PathLike) -> Path:
    path = Path(path)
    path.write_text(format_table(reports), encoding="utf-8", newline="")
    return path


def input_timestamp(paths: Iterable[PathLike]) -> Optional[str]:
    """Latest modification time of the given input files, ISO-8601 UTC."""
    mtimes = [Path(p).stat().st_mtime for p in paths if Path(p).is_file()]
    if not mtimes:
        return None
    return datetime.fromtimestamp(max(mtimes), tz=timezone.utc).isoformat(timespec="seconds")


def write_report(
    report: MetricsReport,
    out_dir: PathLike,
    manifest_sha256: Optional[str] = None,
    timestamp: Optional[str] = None,
) -> Path:
    """Write ``report.json`` and ``table.csv`` into ``out_dir``; returns the JSON path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / REPORT_NAME
    path.write_text(dumps_report(report, manifest_sha256, timestamp), encoding="utf-8", newline="")
    write_table([report], out_dir / TABLE_NAME)
    return path
