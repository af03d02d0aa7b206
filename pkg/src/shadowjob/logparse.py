"""Extract GCC-style compiler errors from raw build logs."""

from __future__ import annotations

import re
from dataclasses import dataclass

# "path:line[:col]: [fatal ]error: message"
_LOCATED = re.compile(
    r"^(?P<file>(?:[A-Za-z]:[\\/])?[^\s:][^:]*?):(?P<line>\d+)(?::(?P<col>\d+))?:\s+(?:fatal\s+)?error:\s*(?P<msg>.*)$"
)
# "[tool: ]error: message" without a line number, e.g. "cc1plus: error: ..."
_BARE = re.compile(r"^(?:[^\s:]+:\s+)?(?:fatal\s+)?[Ee]rror:\s*(?P<msg>.*)$")
_LINKER = re.compile(r"ld returned -?\d+ exit status")
_ANSI = re.compile(r"\x1b\[[0-9;]*[A-Za-z]")
# quoted spans are copied verbatim; everything else has whitespace collapsed
_QUOTED_OR_SPACE = re.compile(r"'[^'\n]*'|‘[^’\n]*’|\s+")


@dataclass(frozen=True)
class Diagnostic:
    build_id: str
    message: str
    file: str | None = None
    line: int | None = None
    column: int | None = None

    def __post_init__(self):
        if self.line is not None and self.file is None:
            raise ValueError("a diagnostic with a line number needs a file")
        if not self.message or "\n" in self.message:
            raise ValueError(f"diagnostic message must be a nonempty single line: {self.message!r}")


def normalize_message(raw: str) -> str:
    """Collapse whitespace runs to one space and trim the ends.

    Text inside '...' or ‘...’ quotes is left untouched.
    """
    collapsed = _QUOTED_OR_SPACE.sub(lambda m: m.group(0) if m.group(0)[0] in "'‘" else " ", raw)
    return collapsed.strip()


def _parse_line(line: str, build_id: str) -> Diagnostic | None:
    if ("error" not in line and "ld returned" not in line) or "warning:" in line:
        return None
    line = _ANSI.sub("", line).strip()
    if line.startswith("| "):
        # bitbake/Yocto task logs prefix compiler output with "| "
        line = line[2:].lstrip()
    linker = _LINKER.search(line)
    if linker:
        return Diagnostic(build_id, linker.group(0))
    m = _LOCATED.match(line)
    if m:
        lineno = int(m.group("line"))
        msg = normalize_message(m.group("msg"))
        if lineno < 1 or not msg:
            return None
        col = int(m.group("col")) if m.group("col") else None
        return Diagnostic(build_id, msg, m.group("file").strip(), lineno, col or None)
    m = _BARE.match(line)
    if m:
        msg = normalize_message(m.group("msg"))
        return Diagnostic(build_id, msg) if msg else None
    return None


def extract_diagnostics(log_text: str, build_id: str = "") -> list[Diagnostic]:
    """Return one :class:`Diagnostic` per error line of ``log_text``, in log order.

    Warnings, notes, caret lines and anything else unrecognised are skipped.
    Repeated identical error lines are all kept.
    """
    out = []
    for line in log_text.replace("\r\n", "\n").replace("\r", "\n").split("\n"):
        diag = _parse_line(line, build_id)
        if diag is not None:
            out.append(diag)
    return out
