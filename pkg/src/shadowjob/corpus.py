"""Load an on-disk corpus (``builds.jsonl``, ``logs/``, ``patches/``) into memory."""

from __future__ import annotations

import hashlib
import json
import logging
import os
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterator, Mapping

from .diffparse import PatchParseError, parse_patch
from .model import BuildRecord, CompileStatus, Patch

log = logging.getLogger(__name__)

REQUIRED_FIELDS = ("build_id", "change_id", "patch_id", "start_time", "compile_status")


class IngestError(ValueError):
    """Malformed corpus metadata."""


class ReferentialIntegrityError(IngestError):
    """A build points at a patch or log that does not exist."""


@dataclass(frozen=True)
class CorpusStore:
    """Immutable view of an ingested corpus.

    ``builds`` is sorted by ``(change_id, start_time, build_id)``.
    """

    builds: tuple[BuildRecord, ...]
    patches: Mapping[str, Patch]
    logs: Mapping[str, str]
    digest: str

    def streams(self) -> Iterator[tuple[str, tuple[BuildRecord, ...]]]:
        """Yield ``(change_id, builds)`` in change-id order."""
        start = 0
        builds = self.builds
        for i in range(1, len(builds) + 1):
            if i == len(builds) or builds[i].change_id != builds[start].change_id:
                yield builds[start].change_id, builds[start:i]
                start = i


def thread_count() -> int:
    """Worker threads for I/O, from ``SHADOWJOB_THREADS`` (0 or unset = auto)."""
    raw = os.environ.get("SHADOWJOB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        log.warning("ignoring non-integer SHADOWJOB_THREADS=%r", raw)
        n = 0
    if n <= 0:
        n = min(32, (os.cpu_count() or 1) + 4)
    return n


def _parse_build(line: str, lineno: int) -> BuildRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise IngestError(f"builds.jsonl line {lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise IngestError(f"builds.jsonl line {lineno}: expected a JSON object")
    who = obj.get("build_id", f"at line {lineno}")
    for key in REQUIRED_FIELDS:
        if obj.get(key) is None:
            raise IngestError(f"build {who}: missing field {key} (builds.jsonl line {lineno})")
    start = obj["start_time"]
    if isinstance(start, bool) or not isinstance(start, int):
        raise IngestError(f"build {who}: start_time must be integer epoch seconds (line {lineno})")
    try:
        status = CompileStatus(obj["compile_status"])
    except ValueError:
        raise IngestError(
            f"build {who}: compile_status must be 'pass' or 'fail' (line {lineno})"
        ) from None
    log_ref = obj.get("log_ref") or None
    if status is CompileStatus.FAIL and log_ref is None:
        raise IngestError(f"build {who}: missing field log_ref (builds.jsonl line {lineno})")
    return BuildRecord(
        build_id=str(obj["build_id"]),
        change_id=str(obj["change_id"]),
        patch_id=str(obj["patch_id"]),
        start_time=start,
        compile_status=status,
        log_ref=log_ref,
    )


def _read_text(path: Path) -> str:
    return path.read_text(encoding="utf-8", errors="replace")


def ingest(corpus_root: str | os.PathLike) -> CorpusStore:
    """Read and validate a corpus directory.

    Every patch referenced by a build is parsed and every failed build's log
    is loaded. Line order in ``builds.jsonl`` does not matter.
    """
    root = Path(corpus_root)
    meta = root / "builds.jsonl"
    if not meta.is_file():
        raise IngestError(f"{root}: no builds found (builds.jsonl missing)")

    builds: list[BuildRecord] = []
    seen: set[str] = set()
    with meta.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            build = _parse_build(line, lineno)
            if build.build_id in seen:
                raise IngestError(f"build {build.build_id}: duplicate build_id (line {lineno})")
            seen.add(build.build_id)
            builds.append(build)
    builds.sort(key=lambda b: (b.change_id, b.start_time, b.build_id))

    patch_dir = root / "patches"
    log_dir = root / "logs"

    def log_path(b: BuildRecord) -> Path | None:
        for candidate in (root / b.log_ref, log_dir / b.log_ref):
            if candidate.is_file():
                return candidate
        return None

    patch_ids = sorted({b.patch_id for b in builds})
    log_paths: dict[str, Path] = {}
    for b in builds:
        if not (patch_dir / f"{b.patch_id}.diff").is_file():
            raise ReferentialIntegrityError(f"build {b.build_id}: patch {b.patch_id} not found")
        if b.log_ref is not None:
            path = log_path(b)
            if path is None:
                raise ReferentialIntegrityError(f"build {b.build_id}: log {b.log_ref} not found")
            if b.failed:
                log_paths[b.build_id] = path

    failed_ids = sorted(log_paths)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        patch_texts = dict(zip(patch_ids, pool.map(lambda pid: _read_text(patch_dir / f"{pid}.diff"), patch_ids)))
        logs = dict(zip(failed_ids, pool.map(lambda bid: _read_text(log_paths[bid]), failed_ids)))

    patches: dict[str, Patch] = {}
    for pid in patch_ids:
        try:
            patches[pid] = parse_patch(patch_texts[pid], patch_id=pid)
        except PatchParseError as exc:
            raise IngestError(f"patch {pid}: {exc}") from None

    return CorpusStore(
        builds=tuple(builds),
        patches=MappingProxyType(patches),
        logs=MappingProxyType(logs),
        digest=_digest(builds, patch_texts, logs),
    )


def _digest(builds, patch_texts: Mapping[str, str], logs: Mapping[str, str]) -> str:
    h = hashlib.sha256()
    for b in sorted(builds, key=lambda b: b.build_id):
        row = [b.build_id, b.change_id, b.patch_id, b.start_time, b.compile_status.value, b.log_ref]
        h.update(json.dumps(row).encode())
        h.update(b"\n")
    for pid in sorted(patch_texts):
        h.update(f"patch {pid}\n".encode())
        h.update(patch_texts[pid].encode("utf-8"))
    for bid in sorted(logs):
        h.update(f"log {bid}\n".encode())
        h.update(logs[bid].encode("utf-8"))
    return "sha256:" + h.hexdigest()


def count_summary(store: CorpusStore) -> dict[str, int]:
    by_status: dict[str, int] = defaultdict(int)
    for b in store.builds:
        by_status[b.compile_status.value] += 1
    return {
        "builds": len(store.builds),
        "changes": sum(1 for _ in store.streams()),
        "patches": len(store.patches),
        "failed_builds": by_status["fail"],
        "passed_builds": by_status["pass"],
        "logs_loaded": len(store.logs),
    }
