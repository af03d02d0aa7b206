"""Deterministic synthetic corpora with a ground-truth manifest.

Each generated failure series has a known error type, error line, fix lines,
resolution time, size and distance. Running the analysis pipeline over the
written corpus should recover the manifest exactly, which makes the
generator the end-to-end oracle for the pipeline.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .classify import OBSERVED_SHARES, ErrorType, class_of
from .diffparse import render_patch
from .model import FileChange, FileKind, Hunk, HunkLine, LineOp, Patch

BASE_TIME = 1_600_000_000
CONTEXT = 3

# realistic default with mode at 3 lines (~27%) and 2 lines second (~20%)
DEFAULT_SIZE_WEIGHTS = {
    0: 0.04, 1: 0.12, 2: 0.20, 3: 0.27, 4: 0.14, 5: 0.07, 6: 0.05,
    7: 0.03, 8: 0.02, 9: 0.02, 10: 0.015, 11: 0.015, 12: 0.01,
}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Dist:
    """Integer-valued distribution: ``fixed``, ``uniform``, ``categorical`` or ``exponential``.

    ``exponential`` is a discretised exponential with the given scale,
    truncated to ``[low, high]``.
    """

    kind: str
    value: int = 0
    low: int = 0
    high: int = 0
    scale: float = 1.0
    weights: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("fixed", "uniform", "categorical", "exponential"):
            raise ScenarioError(f"unknown distribution kind {self.kind!r}")
        if self.kind in ("uniform", "exponential") and self.low > self.high:
            raise ScenarioError(f"{self.kind}: low > high")
        if self.kind == "exponential" and self.scale <= 0:
            raise ScenarioError("exponential: scale must be positive")
        if self.kind == "categorical":
            if not self.weights or any(w < 0 for _, w in self.weights) or sum(w for _, w in self.weights) <= 0:
                raise ScenarioError("categorical: weights must be nonnegative with a positive sum")

    def sample(self, rng: random.Random) -> int:
        if self.kind == "fixed":
            return self.value
        if self.kind == "uniform":
            return rng.randint(self.low, self.high)
        if self.kind == "categorical":
            values = [v for v, _ in self.weights]
            return rng.choices(values, weights=[w for _, w in self.weights])[0]
        span = self.high - self.low
        while True:
            x = int(rng.expovariate(1.0 / self.scale))
            if x <= span:
                return self.low + x

    def support(self) -> tuple[int, int]:
        if self.kind == "fixed":
            return self.value, self.value
        if self.kind == "categorical":
            vals = [v for v, w in self.weights if w > 0]
            return min(vals), max(vals)
        return self.low, self.high

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> Dist:
        obj = dict(obj)
        if "weights" in obj:
            obj["weights"] = tuple(sorted((int(k), float(w)) for k, w in obj["weights"].items()))
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ScenarioError(f"bad distribution {obj}: {exc}") from None

    def to_json(self) -> dict[str, Any]:
        if self.kind == "fixed":
            return {"kind": "fixed", "value": self.value}
        if self.kind == "uniform":
            return {"kind": "uniform", "low": self.low, "high": self.high}
        if self.kind == "exponential":
            return {"kind": "exponential", "scale": self.scale, "low": self.low, "high": self.high}
        return {"kind": "categorical", "weights": {str(v): w for v, w in self.weights}}


def default_mixture() -> dict[ErrorType, float]:
    total = sum(OBSERVED_SHARES.values())
    return {t: share / total for t, share in OBSERVED_SHARES.items()}


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 1
    n_series: int = 100
    type_mixture: dict[ErrorType, float] = field(default_factory=default_mixture)
    delay_model: Dist = Dist("exponential", scale=21600, low=0, high=604800)
    size_model: Dist = Dist("categorical", weights=tuple(DEFAULT_SIZE_WEIGHTS.items()))
    distance_model: Dist = Dist("exponential", scale=30, low=0, high=120)
    line_model: Dist = Dist("uniform", low=1, high=300)
    extra_fail_prob: float = 0.3
    alien_message_prob: float = 0.0
    unresolved_prob: float = 0.0
    multi_series_prob: float = 0.1
    extra_file_prob: float = 0.2
    write_sources: bool = False

    def __post_init__(self):
        for name in ("extra_fail_prob", "alien_message_prob", "unresolved_prob", "multi_series_prob", "extra_file_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ScenarioError(f"{name} must lie in [0, 1], got {p}")
        if self.n_series < 0:
            raise ScenarioError("n_series must be nonnegative")
        if any(not 0.0 <= p <= 1.0 for p in self.type_mixture.values()):
            raise ScenarioError("type_mixture probabilities must lie in [0, 1]")
        if abs(sum(self.type_mixture.values()) - 1.0) > 1e-9:
            raise ScenarioError(f"type_mixture sums to {sum(self.type_mixture.values())!r}, not 1")
        if ErrorType.Unclassified in self.type_mixture:
            raise ScenarioError("use alien_message_prob for unclassified messages")
        if self.size_model.support()[0] < 0:
            raise ScenarioError("size_model must be nonnegative")
        if self.distance_model.support()[0] < 0:
            raise ScenarioError("distance_model must be nonnegative")
        if self.line_model.support()[0] < 1:
            raise ScenarioError("line_model must produce line numbers >= 1")
        if self.delay_model.support()[0] < 0:
            raise ScenarioError("delay_model must be nonnegative")

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> ScenarioSpec:
        kwargs = dict(obj)
        unknown = set(kwargs) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
        if "type_mixture" in kwargs:
            try:
                kwargs["type_mixture"] = {ErrorType(k): float(v) for k, v in kwargs["type_mixture"].items()}
            except ValueError as exc:
                raise ScenarioError(str(exc)) from None
        for key in ("delay_model", "size_model", "distance_model", "line_model"):
            if key in kwargs:
                kwargs[key] = Dist.from_json(kwargs[key])
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path, seed: int | None = None) -> ScenarioSpec:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        if seed is not None:
            obj["seed"] = seed
        return cls.from_json(obj)

    def to_json(self) -> dict[str, Any]:
        out = asdict(self)
        out["type_mixture"] = {t.value: p for t, p in self.type_mixture.items()}
        for key in ("delay_model", "size_model", "distance_model", "line_model"):
            out[key] = getattr(self, key).to_json()
        return out


@dataclass(frozen=True)
class SeriesTruth:
    change_id: str
    error_type: ErrorType
    message: str
    file: str | None
    E: int | None
    fix_lines: tuple[int, ...]
    true_time: int
    true_size: int
    true_distance: int | None
    failing_build_ids: tuple[str, ...]
    fixing_build_id: str
    fixing_patch_id: str

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["error_type"] = self.error_type.value
        d["fix_lines"] = list(self.fix_lines)
        d["failing_build_ids"] = list(self.failing_build_ids)
        return d

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> SeriesTruth:
        d = dict(d)
        d["error_type"] = ErrorType(d["error_type"])
        d["fix_lines"] = tuple(d["fix_lines"])
        d["failing_build_ids"] = tuple(d["failing_build_ids"])
        return cls(**d)


@dataclass(frozen=True)
class GroundTruthManifest:
    series: tuple[SeriesTruth, ...]
    n_builds: int
    unresolved_runs: int
    emission_order: dict[str, tuple[str, ...]]  # change_id -> build ids in time order

    @classmethod
    def load(cls, corpus_dir: str | Path) -> GroundTruthManifest:
        root = Path(corpus_dir)
        with open(root / "manifest.jsonl", encoding="utf-8") as fh:
            series = tuple(SeriesTruth.from_json(json.loads(line)) for line in fh if line.strip())
        with open(root / "scenario.json", encoding="utf-8") as fh:
            info = json.load(fh)
        return cls(
            series,
            info["n_builds"],
            info["unresolved_runs"],
            {k: tuple(v) for k, v in info["emission_order"].items()},
        )


# message realisation -------------------------------------------------------

_IDS = ("err", "status", "buffer", "ctx", "handle", "cfg", "count", "port", "reg_val", "irq_mask", "dma_chan", "timeout_ms")
_TYPES = ("ProductError", "RadioConfig", "PortMap", "DspContext", "BoardInfo", "FrameHeader", "LinkState")
_HEADERS = ("hw_registers", "board_config", "radio_api", "dsp_types", "fpga_map")
_ASSERTS = ("size mismatch", "RadioConfig layout changed", "unsupported board revision")
_TOKENS = (("';'", "'}'"), ("')'", "';'"), ("','", "')'"), ("';'", "'return'"), ("'{'", "'int'"))
_LOCATED_TYPES = tuple(t for t in ErrorType if t not in (ErrorType.Unclassified, ErrorType.LdReturned))
_ALIEN = (
    "redefinition of 'int {id}'",
    "conflicting declaration 'int {id}'",
    "lvalue required as left operand of assignment",
    "stray '\\302' in program",
    "too many arguments to function 'void {id}()'",
)


def _message(error_type: ErrorType, rng: random.Random) -> str:
    ident, typ = rng.choice(_IDS), rng.choice(_TYPES)
    if error_type is ErrorType.WasNotDeclared:
        return f"'{ident}' was not declared in this scope"
    if error_type is ErrorType.HasNoMemberNamed:
        return f"'class {typ}' has no member named '{ident}'"
    if error_type is ErrorType.ExpectedBeforeToken:
        want, got = rng.choice(_TOKENS)
        return f"expected {want} before {got} token"
    if error_type is ErrorType.DoesNotNameAType:
        return f"'{typ}' does not name a type"
    if error_type is ErrorType.NoDeclarationMatches:
        return f"no declaration matches 'int {typ}::{ident}()'"
    if error_type is ErrorType.NoSuchFileOrDirectory:
        return f"{rng.choice(_HEADERS)}.h: No such file or directory"
    if error_type is ErrorType.LdReturned:
        return "ld returned 1 exit status"
    if error_type is ErrorType.InvalidConversion:
        return f"invalid conversion from 'const {typ}*' to '{typ}*' [-fpermissive]"
    if error_type is ErrorType.UnusedVariable:
        return f"unused variable '{ident}' [-Werror=unused-variable]"
    if error_type is ErrorType.DoesNotHaveAnyFieldNamed:
        return f"class '{typ}' does not have any field named '{ident}'"
    if error_type is ErrorType.CannotAllocateAnObjectOf:
        return f"cannot allocate an object of abstract type '{typ}'"
    if error_type is ErrorType.OfNonClassType:
        return f"request for member '{ident}' in '{ident}_', which is of non-class type 'int'"
    if error_type is ErrorType.CannotConvert:
        return f"cannot convert '{typ}' to 'const char*'"
    if error_type is ErrorType.StaticAssertionFailed:
        return f"static assertion failed: {rng.choice(_ASSERTS)}"
    return rng.choice(_ALIEN).format(id=ident)


def source_line(path: str, n: int) -> str:
    """Text of line ``n`` of the synthetic pre-fix version of ``path``."""
    return f"    step_{n}(ctx); // {path.rsplit('/', 1)[-1]}"


def _error_line(file: str | None, line: int | None, col: int, message: str) -> str:
    if file is None:
        return f"collect2: error: {message}"
    severity = "fatal error" if message.endswith("No such file or directory") else "error"
    return f"{file}:{line}:{col}: {severity}: {message}"


def _log(file: str | None, line: int | None, message: str, rng: random.Random) -> str:
    out = [f"[ {rng.randint(1, 99):2d}%] Building CXX object src/CMakeFiles/app.dir/unit.cpp.o"]
    if file is None:
        out += [
            "/usr/bin/ld: build/obj/unit.o: in function `init()':",
            f"unit.cpp:(.text+0x{rng.randint(16, 4095):x}): undefined reference to `{rng.choice(_IDS)}_open'",
        ]
    else:
        out.append(f"{file}: In function 'void {rng.choice(_IDS)}_task()':")
        if rng.random() < 0.5:
            out.append(f"{file}:{line}:1: warning: unused parameter '{rng.choice(_IDS)}' [-Wunused-parameter]")
    col = rng.randint(1, 40)
    out.append(_error_line(file, line, col, message))
    if file is not None:
        out += [f"  {line:4d} |     step_{line}(ctx);", "       |     ^~~~~~"]
    out.append("make[2]: *** [src/CMakeFiles/app.dir/build.make:76: unit.o] Error 1")
    return "\n".join(out) + "\n"


# patch construction --------------------------------------------------------

def _hunk(path: str, length: int, dels: range, n_adds: int, anchor: int, adds_first: bool, tag: str) -> Hunk:
    """One hunk deleting ``dels`` and inserting ``n_adds`` lines in front of old line ``anchor``.

    With ``adds_first`` the insertion sits before the deleted block
    (``anchor == dels.start``); otherwise after it (``anchor == dels.stop``).
    """
    first = dels.start if dels else anchor
    last = dels.stop - 1 if dels else anchor - 1
    before = range(max(1, first - CONTEXT), first)
    after = range(last + 1, min(length, last + CONTEXT) + 1)
    adds = [HunkLine(LineOp.ADD, f"    {tag}_{i}(ctx);") for i in range(n_adds)]
    removed = [HunkLine(LineOp.DEL, source_line(path, n)) for n in dels]
    body = [HunkLine(LineOp.CONTEXT, source_line(path, n)) for n in before]
    body += adds + removed if adds_first else removed + adds
    body += [HunkLine(LineOp.CONTEXT, source_line(path, n)) for n in after]
    old_count = len(before) + len(dels) + len(after)
    new_count = len(before) + n_adds + len(after)
    old_start = before.start if before else first
    if old_count == 0:
        old_start = anchor - 1
    return Hunk(old_start, old_count, old_start if new_count else old_start - 1, new_count, tuple(body))


def _edit(path: str, length: int, error_line: int, distance: int, size: int, rng: random.Random):
    """A single-hunk edit of ``size`` lines whose nearest fix line is ``distance`` from the error.

    Returns ``(hunk, fix_lines)`` in pre-fix coordinates.
    """
    n_dels = rng.randint(0, size)
    n_adds = size - n_dels
    reach = max(n_dels, 1) - 1
    sides = []
    if error_line + distance + reach <= length:
        sides.append("after")
    if error_line - distance - reach >= 1:
        sides.append("before")
    if not sides:
        return None
    if rng.choice(sides) == "after":
        start = error_line + distance
        dels = range(start, start + n_dels)
        anchor = dels.stop if n_dels else start
        adds_first = False
    else:
        end = error_line - distance
        dels = range(end - n_dels + 1, end + 1)
        anchor = dels.start if n_dels else end
        adds_first = True
    fix = set(dels)
    if n_adds:
        fix.add(anchor)
    return _hunk(path, length, dels, n_adds, anchor, adds_first, "fix"), tuple(sorted(fix))


def _split(total: int, parts: int, rng: random.Random) -> list[int]:
    cuts = sorted(rng.sample(range(1, total), parts - 1))
    return [b - a for a, b in zip([0, *cuts], [*cuts, total])]


@dataclass
class _SeriesPlan:
    error_type: ErrorType
    message: str
    file: str | None
    length: int
    E: int | None
    delay: int
    size: int
    distance: int | None
    fix_lines: tuple[int, ...]
    fix_changes: list[FileChange]
    n_earlier: int


def _plan_series(spec: ScenarioSpec, index: int) -> _SeriesPlan:
    rng = random.Random(f"shadowjob-series:{spec.seed}:{index}")
    if rng.random() < spec.alien_message_prob:
        error_type = ErrorType.Unclassified
    else:
        types = list(spec.type_mixture)
        error_type = rng.choices(types, weights=[spec.type_mixture[t] for t in types])[0]
    message = _message(error_type, rng)
    delay = spec.delay_model.sample(rng)
    size = spec.size_model.sample(rng)
    n_earlier = 0
    while n_earlier < 3 and rng.random() < spec.extra_fail_prob:
        n_earlier += 1

    if error_type is ErrorType.LdReturned:
        changes: list[FileChange] = []
        if size == 0:
            changes.append(FileChange(f"prebuilt/lib{rng.choice(_IDS)}_{index}.a", FileKind.BINARY))
        else:
            for j, part in enumerate(_split(size, rng.randint(1, min(3, size)), rng)):
                path = f"lib/module_{index}_{j}.c"
                length = rng.randint(part + 5, part + 200)
                n_dels = rng.randint(0, part)
                start = rng.randint(1, length - n_dels + 1) if n_dels else rng.randint(1, length)
                hunk = _hunk(path, length, range(start, start + n_dels), part - n_dels,
                             start + n_dels, False, "link")
                changes.append(FileChange(path, FileKind.TEXT, (hunk,)))
        return _SeriesPlan(error_type, message, None, 0, None, delay, size, None, (), changes, n_earlier)

    file = f"src/unit_{index}.cpp"
    E = spec.line_model.sample(rng)
    if size == 0:
        distance = None
        length = E + rng.randint(0, 200)
        fix_lines: tuple[int, ...] = ()
        changes = [FileChange(file, FileKind.MODE_ONLY)]
    else:
        distance = spec.distance_model.sample(rng)
        reach = max(size, 1)
        length = E + distance + reach + rng.randint(0, 200)
        edit = _edit(file, length, E, distance, size, rng)
        assert edit is not None, "after-side edit always fits by construction of length"
        hunk, fix_lines = edit
        assert min(abs(f - E) for f in fix_lines) == distance
        changes = [FileChange(file, FileKind.TEXT, (hunk,))]
    if rng.random() < spec.extra_file_prob:
        hdr = f"include/{rng.choice(_HEADERS)}_{index}.h"
        hlen = rng.randint(5, 60)
        at = rng.randint(1, hlen)
        changes.append(FileChange(hdr, FileKind.TEXT, (_hunk(hdr, hlen, range(0), rng.randint(1, 2), at, False, "decl"),)))
    return _SeriesPlan(error_type, message, file, length, E, delay, size, distance, fix_lines, changes, n_earlier)


def _noise_change(rng: random.Random, tag: str) -> list[FileChange]:
    """An unrelated work-in-progress edit, used for builds that are not fixes."""
    path = f"src/feature_{tag}.cpp"
    length = rng.randint(10, 120)
    at = rng.randint(1, length)
    return [FileChange(path, FileKind.TEXT, (_hunk(path, length, range(0), rng.randint(1, 4), at, False, "wip"),))]


class _Writer:
    def __init__(self, root: Path):
        self.root = root
        for sub in ("logs", "patches"):
            (root / sub).mkdir(parents=True, exist_ok=True)
        self.builds: list[str] = []
        self.counter = 0

    def build(self, change_id: str, start: int, status: str, patch_changes, log_text: str | None) -> tuple[str, str]:
        self.counter += 1
        build_id = f"b{self.counter:07d}"
        patch_id = f"p{self.counter:07d}"
        log_ref = None
        if log_text is not None:
            log_ref = f"logs/{build_id}.log"
            _write(self.root / log_ref, log_text)
        _write(self.root / "patches" / f"{patch_id}.diff", render_patch(Patch(patch_id, tuple(patch_changes))))
        self.builds.append(json.dumps({
            "build_id": build_id,
            "change_id": change_id,
            "patch_id": patch_id,
            "start_time": start,
            "compile_status": status,
            "log_ref": log_ref,
        }))
        return build_id, patch_id


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _change_id(seed: int, index: int) -> str:
    return "I" + hashlib.sha1(f"shadowjob-change:{seed}:{index}".encode()).hexdigest()


def generate(spec: ScenarioSpec, out_dir: str | Path) -> GroundTruthManifest:
    """Write a corpus for ``spec`` into ``out_dir`` and return its manifest.

    The output is a pure function of ``spec``: equal specs give
    byte-identical directories.
    """
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    w = _Writer(root)
    truths: list[SeriesTruth] = []
    order: dict[str, list[str]] = {}
    unresolved = 0

    # assign series to change streams: mostly one, sometimes two per stream
    layout_rng = random.Random(f"shadowjob-layout:{spec.seed}")
    streams: list[list[int]] = []
    i = 0
    while i < spec.n_series:
        take = 2 if i + 1 < spec.n_series and layout_rng.random() < spec.multi_series_prob else 1
        streams.append(list(range(i, i + take)))
        i += take

    for c, members in enumerate(streams):
        rng = random.Random(f"shadowjob-change:{spec.seed}:{c}")
        change_id = _change_id(spec.seed, c)
        ids = order.setdefault(change_id, [])
        t = BASE_TIME + c * 86400 + rng.randint(0, 3600)

        def emit(status, changes, log_text):
            bid, pid = w.build(change_id, t, status, changes, log_text)
            ids.append(bid)
            return bid, pid

        if rng.random() < 0.5:
            emit("pass", _noise_change(rng, f"{c}_0"), None)
            t += rng.randint(60, 7200)
        for k, index in enumerate(members):
            plan = _plan_series(spec, index)
            if spec.write_sources and plan.file is not None:
                src = root / "sources" / plan.file
                src.parent.mkdir(parents=True, exist_ok=True)
                _write(src, "".join(source_line(plan.file, n) + "\n" for n in range(1, plan.length + 1)))
            failing = []
            for e in range(plan.n_earlier):
                other = rng.choice(_LOCATED_TYPES)
                line = rng.randint(1, plan.length) if plan.file else None
                msg = _message(other, rng)
                bid, _ = emit("fail", _noise_change(rng, f"{c}_{k}_{e}"),
                              _log(plan.file or f"src/glue_{index}.cpp", line or rng.randint(1, 50), msg, rng))
                failing.append(bid)
                t += rng.randint(1, 7200)
            bid, _ = emit("fail", _noise_change(rng, f"{c}_{k}_last"),
                          _log(plan.file, plan.E, plan.message, rng))
            failing.append(bid)
            t += plan.delay
            fix_bid, fix_pid = emit("pass", plan.fix_changes, None)
            truths.append(SeriesTruth(
                change_id=change_id,
                error_type=plan.error_type,
                message=plan.message,
                file=plan.file,
                E=plan.E,
                fix_lines=plan.fix_lines,
                true_time=plan.delay,
                true_size=plan.size,
                true_distance=plan.distance,
                failing_build_ids=tuple(failing),
                fixing_build_id=fix_bid,
                fixing_patch_id=fix_pid,
            ))
            t += rng.randint(60, 7200)
        if rng.random() < spec.unresolved_prob:
            unresolved += 1
            for e in range(rng.randint(1, 2)):
                msg = _message(ErrorType.WasNotDeclared, rng)
                emit("fail", _noise_change(rng, f"{c}_open_{e}"),
                     _log(f"src/open_{c}.cpp", rng.randint(1, 50), msg, rng))
                t += rng.randint(60, 7200)
        elif rng.random() < 0.3:
            emit("pass", _noise_change(rng, f"{c}_tail"), None)

    _write(root / "builds.jsonl", "".join(line + "\n" for line in w.builds))
    _write(root / "manifest.jsonl", "".join(json.dumps(t.to_json(), sort_keys=True) + "\n" for t in truths))
    info = {
        "spec": spec.to_json(),
        "n_builds": w.counter,
        "n_series": len(truths),
        "unresolved_runs": unresolved,
        "emission_order": order,
    }
    _write(root / "scenario.json", json.dumps(info, indent=1, sort_keys=True) + "\n")
    return GroundTruthManifest(
        tuple(truths), w.counter, unresolved, {k: tuple(v) for k, v in order.items()}
    )


def expected_class_share(mixture: dict[ErrorType, float]) -> dict[str, float]:
    """Class percentages implied by a type mixture."""
    out: dict[str, float] = {}
    for t, p in mixture.items():
        key = class_of(t).value
        out[key] = out.get(key, 0.0) + 100.0 * p
    return out

