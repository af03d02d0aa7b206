import dataclasses
import json
import random
import shutil

import pytest

from conftest import ONE_LINE_DIFF, build, write_corpus
from shadowjob.corpus import IngestError, ReferentialIntegrityError, count_summary, ingest, thread_count
from shadowjob.model import CompileStatus


def test_ingest_counts(tiny_corpus):
    store = ingest(tiny_corpus)
    assert len(store.builds) == 3
    assert len(store.patches) == 3
    assert list(store.logs) == ["b2"]
    assert store.logs["b2"].startswith("src/a.cpp:12:5")
    assert count_summary(store) == {
        "builds": 3, "changes": 1, "patches": 3, "failed_builds": 1, "passed_builds": 2, "logs_loaded": 1,
    }


def test_store_is_immutable(tiny_corpus):
    store = ingest(tiny_corpus)
    with pytest.raises(dataclasses.FrozenInstanceError):
        store.builds = ()
    with pytest.raises(TypeError):
        store.patches["new"] = None
    with pytest.raises(TypeError):
        store.logs["b9"] = "x"


def test_missing_start_time(tmp_path):
    b = build("b7", "I1", 1, "pass", "p1")
    del b["start_time"]
    root = write_corpus(tmp_path, [b], {"p1": ONE_LINE_DIFF}, {})
    with pytest.raises(IngestError, match="build b7: missing field start_time"):
        ingest(root)


def test_unparseable_line_names_line_number(tmp_path):
    root = write_corpus(tmp_path, [build("b1", "I1", 1, "pass", "p1")], {"p1": ONE_LINE_DIFF}, {})
    with open(root / "builds.jsonl", "a") as fh:
        fh.write("{not json\n")
    with pytest.raises(IngestError, match="line 2"):
        ingest(root)


@pytest.mark.parametrize("field, value, message", [
    ("compile_status", "flaky", "compile_status"),
    ("start_time", "2024-01-01", "integer epoch seconds"),
    ("start_time", 1.5, "integer epoch seconds"),
])
def test_bad_field_values(tmp_path, field, value, message):
    b = build("b1", "I1", 1, "pass", "p1")
    b[field] = value
    root = write_corpus(tmp_path, [b], {"p1": ONE_LINE_DIFF}, {})
    with pytest.raises(IngestError, match=message):
        ingest(root)


def test_failed_build_needs_log_ref(tmp_path):
    root = write_corpus(tmp_path, [build("b1", "I1", 1, "fail", "p1")], {"p1": ONE_LINE_DIFF}, {})
    with pytest.raises(IngestError, match="build b1: missing field log_ref"):
        ingest(root)


def test_dangling_patch(tmp_path):
    root = write_corpus(tmp_path, [build("b5", "I1", 1, "pass", "p404")], {}, {})
    with pytest.raises(ReferentialIntegrityError, match="build b5"):
        ingest(root)


def test_dangling_log(tmp_path):
    root = write_corpus(tmp_path, [build("b5", "I1", 1, "fail", "p1", "logs/missing.log")], {"p1": ONE_LINE_DIFF}, {})
    with pytest.raises(ReferentialIntegrityError, match="build b5"):
        ingest(root)


def test_duplicate_build_id(tmp_path):
    b = build("b1", "I1", 1, "pass", "p1")
    root = write_corpus(tmp_path, [b, b], {"p1": ONE_LINE_DIFF}, {})
    with pytest.raises(IngestError, match="duplicate"):
        ingest(root)


def test_missing_metadata_file(tmp_path):
    with pytest.raises(IngestError, match="no builds found"):
        ingest(tmp_path)


def test_unparseable_patch(tmp_path):
    root = write_corpus(tmp_path, [build("b1", "I1", 1, "pass", "p1")],
                        {"p1": "--- a/x\n+++ b/x\n@@ -1,2 +1 @@\n-a\n"}, {})
    with pytest.raises(IngestError, match="patch p1"):
        ingest(root)


def test_unknown_keys_ignored_and_log_ref_relative_to_logs(tmp_path):
    b = build("b1", "I1", 1, "fail", "p1", "b1.log")
    b["runner"] = "ci-7"
    root = write_corpus(tmp_path, [b], {"p1": ONE_LINE_DIFF}, {"b1.log": "x\n"})
    assert ingest(root).logs["b1"] == "x\n"


def test_ordering_ties_broken_by_build_id(tmp_path):
    builds = [
        build("b3", "I2", 50, "pass", "p1"),
        build("b2", "I1", 10, "pass", "p1"),
        build("b1", "I1", 10, "pass", "p1"),
        build("b0", "I1", 11, "pass", "p1"),
    ]
    root = write_corpus(tmp_path, builds, {"p1": ONE_LINE_DIFF}, {})
    store = ingest(root)
    assert [b.build_id for b in store.builds] == ["b1", "b2", "b0", "b3"]
    assert [(c, [b.build_id for b in bs]) for c, bs in store.streams()] == [("I1", ["b1", "b2", "b0"]), ("I2", ["b3"])]
    assert store.builds[0].compile_status is CompileStatus.PASS


def test_shuffled_metadata_gives_identical_store(sim1000, tmp_path):
    root, _ = sim1000
    copy = tmp_path / "copy"
    shutil.copytree(root, copy)
    lines = (copy / "builds.jsonl").read_text().splitlines(keepends=True)
    random.Random(7).shuffle(lines)
    (copy / "builds.jsonl").write_text("".join(lines))
    assert ingest(copy) == ingest(root)


def test_store_orderings_match_generator(sim1000):
    root, manifest = sim1000
    store = ingest(root)
    assert len(store.builds) == manifest.n_builds
    with open(root / "builds.jsonl") as fh:
        assert len(store.builds) == sum(1 for _ in fh)
    got = {c: tuple(b.build_id for b in bs) for c, bs in store.streams()}
    assert got == manifest.emission_order


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("SHADOWJOB_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("SHADOWJOB_THREADS", "0")
    assert thread_count() >= 1
    monkeypatch.setenv("SHADOWJOB_THREADS", "lots")
    assert thread_count() >= 1


def test_ingest_is_thread_count_independent(sim1000, monkeypatch):
    root, _ = sim1000
    monkeypatch.setenv("SHADOWJOB_THREADS", "1")
    serial = ingest(root)
    monkeypatch.setenv("SHADOWJOB_THREADS", "8")
    assert ingest(root) == serial


def test_metadata_written_by_hand_round_trips(tmp_path):
    b = build("b1", "I1", 1700000000, "pass", "p1")
    root = write_corpus(tmp_path, [b], {"p1": ONE_LINE_DIFF}, {})
    (rec,) = ingest(root).builds
    assert json.loads((root / "builds.jsonl").read_text())["start_time"] == rec.start_time
