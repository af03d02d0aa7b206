"""Resolution time, size and distance for each classified error."""

from __future__ import annotations

import posixpath
from dataclasses import dataclass
from typing import Iterable, Sequence

from .classify import ClassifiedError
from .corpus import CorpusStore
from .link import FailureSeries, fixing_patch
from .model import FileChange, FileKind, LineOp, Patch


class CorpusOrderingError(ValueError):
    pass


class UndefinedDistance(ValueError):
    """Raised when there is no fix line to measure against."""


@dataclass(frozen=True)
class ResolutionRecord:
    error: ClassifiedError
    change_id: str
    resolution_time: int
    resolution_size: int
    resolution_distance: int | None
    fix_lines: tuple[int, ...]
    fix_elsewhere: bool = False

    @property
    def error_type(self):
        return self.error.error_type


def resolution_time(series: FailureSeries) -> int:
    """Seconds from the start of the last failing build to the start of the fix."""
    dt = series.fixing_build.start_time - series.last_failure.start_time
    if dt < 0:
        raise CorpusOrderingError(
            f"build {series.fixing_build.build_id} starts before failing build "
            f"{series.last_failure.build_id}"
        )
    return dt


def _norm(path: str) -> str:
    path = posixpath.normpath(path.replace("\\", "/"))
    return path[2:] if path.startswith("./") else path


def find_file_change(patch: Patch, file: str) -> FileChange | None:
    """The change for ``file``; falls back to a unique path-suffix match.

    Compilers often print paths relative to a build directory or as absolute
    paths, while diffs use repository-relative ones.
    """
    exact = patch.file(file)
    if exact is not None:
        return exact
    target = _norm(file)
    hits = []
    for fc in patch.file_changes:
        p = _norm(fc.path)
        if p == target or target.endswith("/" + p) or p.endswith("/" + target):
            hits.append(fc)
    return hits[0] if len(hits) == 1 else None


def fix_line_numbers(patch: Patch, file: str) -> list[int]:
    """Pre-fix line numbers touched by the patch in ``file``.

    Deleted lines contribute their own number. A run of added lines
    contributes the number of the old line it is inserted in front of.
    """
    fc = find_file_change(patch, file)
    if fc is None or fc.kind is not FileKind.TEXT:
        return []
    lines: set[int] = set()
    for hunk in fc.hunks:
        # git anchors empty pre-images at the line before the insertion
        cursor = hunk.old_start if hunk.old_count else hunk.old_start + 1
        prev_op = None
        for ln in hunk.lines:
            if ln.op is LineOp.ADD:
                if prev_op is not LineOp.ADD:
                    lines.add(max(cursor, 1))
            else:
                if ln.op is LineOp.DEL:
                    lines.add(cursor)
                cursor += 1
            prev_op = ln.op
    return sorted(lines)


def resolution_distance(error_line: int, fix_lines: Sequence[int]) -> int:
    if not fix_lines:
        raise UndefinedDistance("no fix lines")
    return min(abs(f - error_line) for f in fix_lines)


def resolution_size(patch: Patch, file: str | None = None) -> int:
    """Added plus deleted lines in ``file``, or in the whole patch when ``file`` is None."""
    if file is None:
        return patch.size
    fc = find_file_change(patch, file)
    return fc.size if fc is not None else 0


def _records_for(series: FailureSeries, patch: Patch) -> Iterable[ResolutionRecord]:
    dt = resolution_time(series)
    for err in series.errors:
        diag = err.diagnostic
        if diag.file is None:
            yield ResolutionRecord(err, series.change_id, dt, patch.size, None, ())
            continue
        touched = find_file_change(patch, diag.file) is not None
        fix_lines = tuple(fix_line_numbers(patch, diag.file))
        distance = None
        if diag.line is not None and fix_lines:
            distance = resolution_distance(diag.line, fix_lines)
        yield ResolutionRecord(
            err,
            series.change_id,
            dt,
            resolution_size(patch, diag.file),
            distance,
            fix_lines,
            fix_elsewhere=not touched,
        )


def compute_resolutions(series_list: Iterable[FailureSeries], store: CorpusStore) -> list[ResolutionRecord]:
    records = []
    for series in series_list:
        records.extend(_records_for(series, fixing_patch(series, store)))
    return records
