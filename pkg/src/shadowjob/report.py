"""Write analysis results as ``report.json`` plus CSV tables.

Output is byte-stable: keys are sorted, floats are rounded to 6 significant
digits, CSVs use LF line endings.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .classify import ClassifiedError, ErrorClass, ErrorType, class_of
from .logparse import Diagnostic
from .metrics import ResolutionRecord
from .stats import (
    DISTANCE_BINS,
    SIZE_BINS,
    correlation_table,
    distance_bin_label,
    distributions,
    heatmap,
    normalize_times,
    quartiles,
    size_bin_label,
    top_types,
)

log = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).with_name("report.schema.json")
_CORR_COLUMNS = ("error_type", "distance_size", "distance_time", "size_time", "sample_count")
ANOMALY_KEYS = ("unresolved_series", "no_diagnostic_series", "fix_elsewhere", "undefined_distance")


@dataclass(frozen=True)
class ReportOptions:
    top_k: int = 4
    normalize_time: bool = False


@dataclass
class AnalysisReport:
    data: dict[str, Any]
    files: dict[str, str] = field(default_factory=dict)  # file name -> content


def fmt(x: float) -> str:
    return f"{x:.6g}"


def round6(x: float | None) -> float | None:
    return None if x is None else float(fmt(x))


def _summary(values: Sequence[float]) -> dict[str, float] | None:
    if not values:
        return None
    s = quartiles(values)
    return {k: round6(float(v)) for k, v in zip(("min", "q1", "median", "q3", "max"), s.as_tuple())}


def anomaly_counts(records: Sequence[ResolutionRecord], unresolved: int = 0, no_diagnostic: int = 0) -> dict[str, int]:
    return {
        "unresolved_series": unresolved,
        "no_diagnostic_series": no_diagnostic,
        "fix_elsewhere": sum(r.fix_elsewhere for r in records),
        "undefined_distance": sum(r.resolution_distance is None for r in records),
    }


def build_report(
    records: Sequence[ResolutionRecord],
    anomalies: dict[str, int],
    corpus_digest: str,
    options: ReportOptions = ReportOptions(),
) -> AnalysisReport:
    dist = distributions(records)
    times = [r.resolution_time for r in records]
    if options.normalize_time:
        times = normalize_times(times)

    per_type: dict[str, Any] = {}
    summary_rows = []
    for t in ErrorType:
        idx = [i for i, r in enumerate(records) if r.error_type is t]
        if not idx:
            continue
        metrics = {
            "time": [times[i] for i in idx],
            "size": [records[i].resolution_size for i in idx],
            "distance": [records[i].resolution_distance for i in idx if records[i].resolution_distance is not None],
        }
        entry: dict[str, Any] = {"count": len(idx)}
        for name, values in metrics.items():
            entry[name] = _summary(values)
            if entry[name] is not None:
                summary_rows.append([t.value, name, len(values), *entry[name].values()])
        per_type[t.value] = entry

    correlations = correlation_table(records, options.top_k)
    heatmaps = [heatmap(records, t) for t in top_types(records, options.top_k)]

    warnings = []
    if not records:
        warnings.append("no resolution records: corpus has no resolved failure series")

    data = {
        "corpus_digest": corpus_digest,
        "generated_with": f"shadowjob {__version__}",
        "options": {
            "top_k": options.top_k,
            "normalize_time": options.normalize_time,
            "time_unit": "normalized [0,1]" if options.normalize_time else "seconds",
            "whiskers": "min/max",
            "float_precision": "6 significant digits",
        },
        "type_distribution": {
            "total": dist.total,
            "types": [
                {
                    "type": t.value,
                    "class": class_of(t).value,
                    "count": dist.type_counts[t],
                    "percent": round6(dist.type_percent[t]),
                }
                for t in ErrorType
            ],
        },
        "class_distribution": {
            "total": dist.total,
            "classes": [
                {"class": c.value, "count": dist.class_counts[c], "percent": round6(dist.class_percent[c])}
                for c in ErrorClass
            ],
        },
        "size_histogram": [
            {"size": size_bin_label(b), "count": n} for b, n in zip(SIZE_BINS, dist.size_histogram)
        ],
        "per_type_summaries": per_type,
        "correlations": [
            {
                "error_type": row.error_type,
                "distance_size": round6(row.distance_size),
                "distance_time": round6(row.distance_time),
                "size_time": round6(row.size_time),
                "sample_count": row.sample_count,
            }
            for row in correlations
        ],
        "heatmaps": [
            {
                "error_type": g.error_type.value,
                "size_bins": [size_bin_label(b) for b in SIZE_BINS],
                "distance_bins": [distance_bin_label(b) for b in DISTANCE_BINS],
                "counts": [list(row) for row in g.counts],
                "excluded_without_distance": g.excluded,
            }
            for g in heatmaps
        ],
        "anomalies": {k: int(anomalies.get(k, 0)) for k in ANOMALY_KEYS},
        "warnings": warnings,
    }

    files = {"report.json": json.dumps(data, indent=2, sort_keys=True) + "\n"}
    files["types.csv"] = _csv(
        ["type", "class", "count", "percent"],
        [[e["type"], e["class"], e["count"], e["percent"]] for e in data["type_distribution"]["types"]],
    )
    files["classes.csv"] = _csv(
        ["class", "count", "percent"],
        [[e["class"], e["count"], e["percent"]] for e in data["class_distribution"]["classes"]],
    )
    files["summaries.csv"] = _csv(["type", "metric", "count", "min", "q1", "median", "q3", "max"], summary_rows)
    files["correlations.csv"] = _csv(
        list(_CORR_COLUMNS), [[c[k] for k in _CORR_COLUMNS] for c in data["correlations"]]
    )
    for g in data["heatmaps"]:
        files[f"heatmap_{g['error_type']}.csv"] = _csv(
            ["distance\\size", *g["size_bins"]],
            [[label, *row] for label, row in zip(g["distance_bins"], g["counts"])],
        )
    return AnalysisReport(data, files)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return fmt(v)
    return str(v)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def render_report(
    records: Sequence[ResolutionRecord],
    out_dir: str | os.PathLike,
    *,
    anomalies: dict[str, int] | None = None,
    corpus_digest: str = "",
    options: ReportOptions = ReportOptions(),
) -> AnalysisReport:
    """Build the report and write every file into ``out_dir``."""
    report = build_report(records, anomalies or anomaly_counts(records), corpus_digest, options)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, content in report.files.items():
        with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
    for w in report.data["warnings"]:
        log.warning("%s", w)
    return report


# Record (de)serialization, used to re-render a report without re-ingesting.

def record_to_dict(r: ResolutionRecord) -> dict[str, Any]:
    d = r.error.diagnostic
    return {
        "change_id": r.change_id,
        "build_id": d.build_id,
        "error_type": r.error_type.value,
        "error_class": r.error.error_class.value,
        "file": d.file,
        "line": d.line,
        "column": d.column,
        "message": d.message,
        "resolution_time": r.resolution_time,
        "resolution_size": r.resolution_size,
        "resolution_distance": r.resolution_distance,
        "fix_lines": list(r.fix_lines),
        "fix_elsewhere": r.fix_elsewhere,
    }


def record_from_dict(d: dict[str, Any]) -> ResolutionRecord:
    diag = Diagnostic(d["build_id"], d["message"], d["file"], d["line"], d["column"])
    return ResolutionRecord(
        error=ClassifiedError(diag, ErrorType(d["error_type"])),
        change_id=d["change_id"],
        resolution_time=d["resolution_time"],
        resolution_size=d["resolution_size"],
        resolution_distance=d["resolution_distance"],
        fix_lines=tuple(d["fix_lines"]),
        fix_elsewhere=d["fix_elsewhere"],
    )
