"""Run ingest -> link -> metrics in one call."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .corpus import CorpusStore, ingest
from .link import FailureSeries, build_series, unresolved_runs
from .metrics import ResolutionRecord, compute_resolutions
from .report import AnalysisReport, ReportOptions, anomaly_counts, record_from_dict, record_to_dict, render_report

RESOLUTIONS_FILE = "resolutions.json"


@dataclass(frozen=True)
class Analysis:
    store: CorpusStore
    series: list[FailureSeries]
    records: list[ResolutionRecord]
    unresolved: int

    @property
    def anomalies(self) -> dict[str, int]:
        return anomaly_counts(
            self.records,
            unresolved=self.unresolved,
            no_diagnostic=sum(s.no_diagnostic for s in self.series),
        )


def analyze_store(store: CorpusStore) -> Analysis:
    series = build_series(store)
    return Analysis(store, series, compute_resolutions(series, store), len(unresolved_runs(store)))


def analyze(corpus_root: str | os.PathLike) -> Analysis:
    return analyze_store(ingest(corpus_root))


def write_analysis(analysis: Analysis, out_dir: str | os.PathLike, options: ReportOptions) -> AnalysisReport:
    """Render the report and save the per-error records next to it."""
    report = render_report(
        analysis.records,
        out_dir,
        anomalies=analysis.anomalies,
        corpus_digest=analysis.store.digest,
        options=options,
    )
    payload = {
        "corpus_digest": analysis.store.digest,
        "anomalies": analysis.anomalies,
        "records": [record_to_dict(r) for r in analysis.records],
    }
    with open(Path(out_dir) / RESOLUTIONS_FILE, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    return report


def rerender(resolutions_path: str | os.PathLike, out_dir: str | os.PathLike, options: ReportOptions) -> AnalysisReport:
    """Re-render a report from a saved ``resolutions.json``."""
    with open(resolutions_path, encoding="utf-8") as fh:
        payload = json.load(fh)
    records = [record_from_dict(d) for d in payload["records"]]
    return render_report(
        records,
        out_dir,
        anomalies=payload["anomalies"],
        corpus_digest=payload["corpus_digest"],
        options=options,
    )
