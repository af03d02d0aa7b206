"""Group builds into failure series and attach each series to its fixing patch."""

from __future__ import annotations

from dataclasses import dataclass

from .classify import ClassifiedError, classify
from .corpus import CorpusStore, ReferentialIntegrityError
from .logparse import extract_diagnostics
from .model import BuildRecord, Patch


@dataclass(frozen=True)
class FailureSeries:
    """Consecutive failing builds of one change, ended by the first passing build.

    ``errors`` come from the last failing build only.
    """

    change_id: str
    failing_builds: tuple[BuildRecord, ...]
    fixing_build: BuildRecord
    errors: tuple[ClassifiedError, ...]

    def __post_init__(self):
        if not self.failing_builds:
            raise ValueError("a failure series needs at least one failing build")
        if self.fixing_build.failed:
            raise ValueError(f"fixing build {self.fixing_build.build_id} did not pass")

    @property
    def last_failure(self) -> BuildRecord:
        return self.failing_builds[-1]

    @property
    def no_diagnostic(self) -> bool:
        return not self.errors


def _runs(builds: tuple[BuildRecord, ...]):
    """Yield ``(fails, terminating_pass_or_None)`` for each maximal run of failures."""
    run: list[BuildRecord] = []
    for b in builds:
        if b.failed:
            run.append(b)
        elif run:
            yield tuple(run), b
            run = []
    if run:
        yield tuple(run), None


def _errors(store: CorpusStore, build: BuildRecord) -> tuple[ClassifiedError, ...]:
    return tuple(classify(d) for d in extract_diagnostics(store.logs.get(build.build_id, ""), build.build_id))


def build_series(store: CorpusStore) -> list[FailureSeries]:
    """Every run of failures followed by a pass, ordered by change id then time."""
    series = []
    for change_id, builds in store.streams():
        for fails, fix in _runs(builds):
            if fix is not None:
                series.append(FailureSeries(change_id, fails, fix, _errors(store, fails[-1])))
    return series


def unresolved_runs(store: CorpusStore) -> list[tuple[BuildRecord, ...]]:
    """Trailing failure runs that never reached a passing build."""
    return [fails for _, builds in store.streams() for fails, fix in _runs(builds) if fix is None]


def fixing_patch(series: FailureSeries, store: CorpusStore) -> Patch:
    try:
        return store.patches[series.fixing_build.patch_id]
    except KeyError:
        raise ReferentialIntegrityError(
            f"build {series.fixing_build.build_id}: patch {series.fixing_build.patch_id} not found"
        ) from None
