"""Parse and render git-style unified diffs.

Only the structure needed for locating fixes is kept: per-file hunks with
their old/new coordinates, plus whether a file change was binary or a pure
permission (mode) change. Index lines, similarity scores and binary payloads
are skipped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import FileChange, FileKind, Hunk, HunkLine, LineOp, Patch

_HUNK_HEADER = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")
_BINARY = re.compile(r"^Binary files (.+) and (.+) differ$")
_DEV_NULL = "/dev/null"


class PatchParseError(ValueError):
    """Malformed diff. ``offset`` is the byte offset of the offending line."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass
class _Stanza:
    old_path: str | None = None
    new_path: str | None = None
    git_paths: tuple[str, str] | None = None
    mode_change: bool = False
    binary: bool = False
    deleted_file: bool = False
    new_file: bool = False
    hunks: list[Hunk] = field(default_factory=list)

    def file_changes(self) -> list[FileChange]:
        old, new = self.old_path, self.new_path
        if old is None and new is None and self.git_paths:
            old, new = self.git_paths
            if self.new_file:
                old = None
            if self.deleted_file:
                new = None
        if self.binary:
            kind = FileKind.BINARY
        elif self.mode_change and not self.hunks:
            kind = FileKind.MODE_ONLY
        else:
            kind = FileKind.TEXT
        hunks = tuple(self.hunks) if kind is FileKind.TEXT else ()
        if old is not None and new is not None and old != new:
            # a rename is modelled as removal of the old path plus the new path
            return [FileChange(old, FileKind.TEXT, ()), FileChange(new, kind, hunks)]
        path = new if new is not None else old
        if path is None:
            return []
        return [FileChange(path, kind, hunks)]


def _strip_prefix(path: str, prefix: str) -> str:
    return path[len(prefix):] if path.startswith(prefix) else path


def _header_path(rest: str, prefix: str) -> str | None:
    # "--- a/foo.c\t2021-01-01 10:00" -> "foo.c"
    token = rest.split("\t", 1)[0].rstrip()
    if token.startswith('"') and token.endswith('"') and len(token) > 1:
        token = token[1:-1]
    if token == _DEV_NULL:
        return None
    return _strip_prefix(token, prefix)


def _split_git_header(rest: str) -> tuple[str, str] | None:
    # "a/x y.c b/x y.c": prefer the split where both halves name the same path
    candidates = [m.start() for m in re.finditer(" b/", rest)]
    for pos in candidates:
        left, right = rest[:pos], rest[pos + 1:]
        if left[2:] == right[2:]:
            return _strip_prefix(left, "a/"), _strip_prefix(right, "b/")
    if candidates:
        pos = candidates[-1]
        return _strip_prefix(rest[:pos], "a/"), _strip_prefix(rest[pos + 1:], "b/")
    return None


def _lines_with_offsets(text: str):
    offset = 0
    for raw in text.split("\n"):
        yield offset, raw[:-1] if raw.endswith("\r") else raw
        offset += len(raw.encode("utf-8")) + 1


def parse_patch(diff_text: str, patch_id: str = "") -> Patch:
    """Parse a (possibly multi-file) git-style unified diff into a :class:`Patch`.

    Raises :class:`PatchParseError` on a malformed hunk header, on hunk bodies
    whose line counts disagree with the header, and on duplicate paths.
    """
    lines = list(_lines_with_offsets(diff_text))
    if lines and lines[-1][1] == "":
        lines.pop()
    changes: list[FileChange] = []
    stanza: _Stanza | None = None

    def flush():
        if stanza is not None:
            changes.extend(stanza.file_changes())

    i = 0
    while i < len(lines):
        offset, line = lines[i]
        if line.startswith("diff --git "):
            flush()
            stanza = _Stanza(git_paths=_split_git_header(line[len("diff --git "):]))
        elif line.startswith("--- ") and i + 1 < len(lines) and lines[i + 1][1].startswith("+++ "):
            if stanza is None or stanza.hunks or stanza.old_path or stanza.new_path:
                flush()
                stanza = _Stanza()
            stanza.old_path = _header_path(line[4:], "a/")
            stanza.new_path = _header_path(lines[i + 1][1][4:], "b/")
            if stanza.old_path is None and stanza.new_path is None:
                raise PatchParseError("both sides of the diff are /dev/null", offset)
            i += 1
        elif line.startswith("@@"):
            if stanza is None:
                raise PatchParseError("hunk outside of a file stanza", offset)
            hunk, i = _read_hunk(lines, i)
            stanza.hunks.append(hunk)
            continue
        elif stanza is not None:
            if line.startswith("old mode ") or line.startswith("new mode "):
                stanza.mode_change = True
            elif line.startswith("new file mode "):
                stanza.new_file = True
            elif line.startswith("deleted file mode "):
                stanza.deleted_file = True
            elif line.startswith("GIT binary patch"):
                stanza.binary = True
            else:
                m = _BINARY.match(line)
                if m:
                    stanza.binary = True
                    old, new = (_header_path(p, pre) for p, pre in zip(m.groups(), ("a/", "b/")))
                    if stanza.old_path is None and stanza.new_path is None:
                        stanza.old_path, stanza.new_path = old, new
        i += 1
    flush()
    try:
        return Patch(patch_id, tuple(changes))
    except ValueError as exc:
        raise PatchParseError(str(exc), 0) from None


def _read_hunk(lines, i: int) -> tuple[Hunk, int]:
    offset, header = lines[i]
    m = _HUNK_HEADER.match(header)
    if not m:
        raise PatchParseError(f"malformed hunk header {header!r}", offset)
    old_start, new_start = int(m.group(1)), int(m.group(3))
    old_count = int(m.group(2)) if m.group(2) is not None else 1
    new_count = int(m.group(4)) if m.group(4) is not None else 1
    old_left, new_left = old_count, new_count
    body: list[HunkLine] = []
    i += 1
    while old_left > 0 or new_left > 0:
        if i >= len(lines):
            end = lines[-1][0] + len(lines[-1][1].encode("utf-8"))
            raise PatchParseError(
                f"hunk {header!r} ended early: {old_left} old and {new_left} new lines missing", end
            )
        offset, line = lines[i]
        tag, text = line[:1], line[1:]
        if tag == "\\":
            i += 1
            continue
        if tag == " " or line == "":
            op = LineOp.CONTEXT
            old_left -= 1
            new_left -= 1
        elif tag == "-":
            op = LineOp.DEL
            old_left -= 1
        elif tag == "+":
            op = LineOp.ADD
            new_left -= 1
        else:
            raise PatchParseError(f"unexpected line in hunk {header!r}: {line!r}", offset)
        if old_left < 0 or new_left < 0:
            raise PatchParseError(f"hunk {header!r} line counts do not match its body", offset)
        body.append(HunkLine(op, text))
        i += 1
    # trailing "\ No newline at end of file"
    while i < len(lines) and lines[i][1].startswith("\\"):
        i += 1
    try:
        hunk = Hunk(old_start, old_count, new_start, new_count, tuple(body))
    except ValueError as exc:
        raise PatchParseError(str(exc), offset) from None
    return hunk, i


_PREFIX = {LineOp.CONTEXT: " ", LineOp.ADD: "+", LineOp.DEL: "-"}


def render_patch(patch: Patch) -> str:
    """Render a patch as git-style diff text; inverse of :func:`parse_patch`."""
    out: list[str] = []
    for fc in patch.file_changes:
        out.append(f"diff --git a/{fc.path} b/{fc.path}")
        if fc.kind is FileKind.MODE_ONLY:
            out += ["old mode 100644", "new mode 100755"]
        elif fc.kind is FileKind.BINARY:
            out += ["index 0000001..0000002 100644", f"Binary files a/{fc.path} and b/{fc.path} differ"]
        elif fc.hunks:
            out += [f"--- a/{fc.path}", f"+++ b/{fc.path}"]
            for h in fc.hunks:
                out.append(f"@@ -{h.old_start},{h.old_count} +{h.new_start},{h.new_count} @@")
                out += [_PREFIX[ln.op] + ln.text for ln in h.lines]
    return "\n".join(out) + "\n" if out else ""
