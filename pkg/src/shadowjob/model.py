"""Core corpus records: builds, patches and their hunks."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple


class CompileStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"


class FileKind(str, Enum):
    TEXT = "text"
    BINARY = "binary"
    MODE_ONLY = "mode_only"


class LineOp(str, Enum):
    CONTEXT = "context"
    ADD = "add"
    DEL = "del"


class HunkLine(NamedTuple):
    op: LineOp
    text: str


@dataclass(frozen=True)
class BuildRecord:
    """One CI invocation as listed in ``builds.jsonl``."""

    build_id: str
    change_id: str
    patch_id: str
    start_time: int
    compile_status: CompileStatus
    log_ref: str | None = None

    @property
    def failed(self) -> bool:
        return self.compile_status is CompileStatus.FAIL


@dataclass(frozen=True)
class Hunk:
    old_start: int
    old_count: int
    new_start: int
    new_count: int
    lines: tuple[HunkLine, ...] = ()

    def __post_init__(self):
        old = sum(1 for ln in self.lines if ln.op is not LineOp.ADD)
        new = sum(1 for ln in self.lines if ln.op is not LineOp.DEL)
        if old != self.old_count or new != self.new_count:
            raise ValueError(
                f"hunk -{self.old_start},{self.old_count} +{self.new_start},{self.new_count} "
                f"has {old} old-side and {new} new-side lines"
            )
        # git writes "-0,0" for an empty pre-image; anything else must be >= 1
        if self.old_start < (0 if self.old_count == 0 else 1):
            raise ValueError(f"invalid old_start {self.old_start}")
        if self.new_start < (0 if self.new_count == 0 else 1):
            raise ValueError(f"invalid new_start {self.new_start}")

    @property
    def added(self) -> int:
        return sum(1 for ln in self.lines if ln.op is LineOp.ADD)

    @property
    def deleted(self) -> int:
        return sum(1 for ln in self.lines if ln.op is LineOp.DEL)


@dataclass(frozen=True)
class FileChange:
    path: str
    kind: FileKind = FileKind.TEXT
    hunks: tuple[Hunk, ...] = ()

    def __post_init__(self):
        if self.kind is not FileKind.TEXT and self.hunks:
            raise ValueError(f"{self.path}: {self.kind.value} change cannot carry hunks")

    @property
    def size(self) -> int:
        """Added plus deleted lines; binary and mode-only changes count as 0."""
        return sum(h.added + h.deleted for h in self.hunks)


@dataclass(frozen=True)
class Patch:
    patch_id: str
    file_changes: tuple[FileChange, ...] = field(default=())

    def __post_init__(self):
        paths = [fc.path for fc in self.file_changes]
        if len(paths) != len(set(paths)):
            raise ValueError(f"patch {self.patch_id}: duplicate file paths")

    def file(self, path: str) -> FileChange | None:
        for fc in self.file_changes:
            if fc.path == path:
                return fc
        return None

    @property
    def size(self) -> int:
        return sum(fc.size for fc in self.file_changes)
