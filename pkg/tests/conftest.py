from __future__ import annotations

import json
from pathlib import Path

import pytest

from shadowjob.simulate import ScenarioSpec, generate


def write_corpus(root: Path, builds: list[dict], patches: dict[str, str], logs: dict[str, str]) -> Path:
    """Lay out a hand-written corpus directory."""
    (root / "patches").mkdir(parents=True, exist_ok=True)
    (root / "logs").mkdir(exist_ok=True)
    (root / "builds.jsonl").write_text("".join(json.dumps(b) + "\n" for b in builds), encoding="utf-8")
    for pid, text in patches.items():
        (root / "patches" / f"{pid}.diff").write_text(text, encoding="utf-8")
    for name, text in logs.items():
        (root / "logs" / name).write_text(text, encoding="utf-8")
    return root


def build(build_id, change_id, t, status, patch_id=None, log_ref=None):
    return {
        "build_id": build_id,
        "change_id": change_id,
        "patch_id": patch_id or f"p_{build_id}",
        "start_time": t,
        "compile_status": status,
        "log_ref": log_ref,
    }


ONE_LINE_DIFF = """\
diff --git a/src/a.cpp b/src/a.cpp
--- a/src/a.cpp
+++ b/src/a.cpp
@@ -10,0 +11 @@
+int err = 0;
"""


@pytest.fixture
def tiny_corpus(tmp_path):
    """Three builds of one change: pass, fail, pass."""
    builds = [
        build("b1", "I1", 100, "pass", "p1"),
        build("b2", "I1", 200, "fail", "p2", "logs/b2.log"),
        build("b3", "I1", 260, "pass", "p3"),
    ]
    patches = {"p1": ONE_LINE_DIFF, "p2": ONE_LINE_DIFF, "p3": ONE_LINE_DIFF}
    logs = {"b2.log": "src/a.cpp:12:5: error: 'err' was not declared in this scope\n"}
    return write_corpus(tmp_path / "corpus", builds, patches, logs)


@pytest.fixture(scope="session")
def sim1000(tmp_path_factory):
    """The seed-1, 1,000-series corpus used by several round-trip tests."""
    root = tmp_path_factory.mktemp("sim1000")
    manifest = generate(ScenarioSpec(seed=1, n_series=1000, write_sources=True, alien_message_prob=0.0), root)
    return root, manifest


SIM10K_SEED = 20240


@pytest.fixture(scope="session")
def sim10k(tmp_path_factory):
    """A 10,000-series corpus at the default mixture with a pinned seed."""
    root = tmp_path_factory.mktemp("sim10k")
    manifest = generate(ScenarioSpec(seed=SIM10K_SEED, n_series=10_000), root)
    return root, manifest


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        _VERDICTS.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
