"""Summaries, correlations, distributions and heat maps over resolution records."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .classify import ErrorClass, ErrorType
from .metrics import ResolutionRecord

ALL_ERRORS = "AllErrors"

SIZE_BINS = tuple(range(8))  # 7 means ">= 7"
DISTANCE_BIN_WIDTH = 10
DISTANCE_BINS = tuple(range(11))  # bin 10 means ">= 100"


@dataclass(frozen=True)
class FiveNumberSummary:
    min: float
    q1: float
    median: float
    q3: float
    max: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.min, self.q1, self.median, self.q3, self.max)


def quartiles(values: Sequence[float]) -> FiveNumberSummary:
    """Five-number summary.

    A quartile boundary that falls exactly between two elements is the mean
    of its neighbours; otherwise it is the element it falls on.
    """
    if not values:
        raise ValueError("quartiles of an empty sequence")
    x = sorted(values)
    n = len(x)

    def boundary(k: int) -> float:
        # 1-based position k*n/4, kept in integer arithmetic
        if (k * n) % 4 == 0:
            p = k * n // 4
            return (x[p - 1] + x[p]) / 2
        return x[-(-k * n // 4) - 1]

    return FiveNumberSummary(x[0], boundary(1), boundary(2), boundary(3), x[-1])


def pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Product-moment correlation; ``None`` when either series is constant."""
    n = len(x)
    if n != len(y):
        raise ValueError(f"length mismatch: {n} vs {len(y)}")
    if n < 2:
        raise ValueError("pearson needs at least two pairs")
    if min(x) == max(x) or min(y) == max(y):
        return None
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class CorrelationRow:
    error_type: str  # an ErrorType value or ALL_ERRORS
    distance_size: float | None
    distance_time: float | None
    size_time: float | None
    sample_count: int


def top_types(records: Sequence[ResolutionRecord], k: int) -> list[ErrorType]:
    """The ``k`` most frequent classified types; ties go to the more common type overall."""
    counts = Counter(r.error_type for r in records if r.error_type is not ErrorType.Unclassified)
    ranked = sorted(counts, key=lambda t: (-counts[t], t.rank))
    return ranked[:k]


def _correlation_row(label: str, records: Sequence[ResolutionRecord]) -> CorrelationRow:
    usable = [r for r in records if r.resolution_distance is not None]
    if len(usable) < 2:
        return CorrelationRow(label, None, None, None, len(usable))
    dist = [r.resolution_distance for r in usable]
    size = [r.resolution_size for r in usable]
    time = [r.resolution_time for r in usable]
    return CorrelationRow(label, pearson(dist, size), pearson(dist, time), pearson(size, time), len(usable))


def correlation_table(records: Sequence[ResolutionRecord], top_k: int = 4) -> list[CorrelationRow]:
    rows = [
        _correlation_row(t.value, [r for r in records if r.error_type is t])
        for t in top_types(records, top_k)
    ]
    rows.append(_correlation_row(ALL_ERRORS, records))
    return rows


def size_bin(size: int) -> int:
    return min(size, SIZE_BINS[-1])


def distance_bin(distance: int) -> int:
    return min(distance // DISTANCE_BIN_WIDTH, DISTANCE_BINS[-1])


def size_bin_label(b: int) -> str:
    return f">={b}" if b == SIZE_BINS[-1] else str(b)


def distance_bin_label(b: int) -> str:
    lo = b * DISTANCE_BIN_WIDTH
    return f">={lo}" if b == DISTANCE_BINS[-1] else f"{lo}-{lo + DISTANCE_BIN_WIDTH - 1}"


@dataclass(frozen=True)
class Distributions:
    total: int
    type_counts: dict[ErrorType, int]
    type_percent: dict[ErrorType, float]
    class_counts: dict[ErrorClass, int]
    class_percent: dict[ErrorClass, float]
    size_histogram: tuple[int, ...]  # indexed by size bin


def distributions(records: Sequence[ResolutionRecord]) -> Distributions:
    n = len(records)
    type_counts = {t: 0 for t in ErrorType}
    class_counts = {c: 0 for c in ErrorClass}
    hist = [0] * len(SIZE_BINS)
    for r in records:
        type_counts[r.error_type] += 1
        class_counts[r.error.error_class] += 1
        hist[size_bin(r.resolution_size)] += 1

    def pct(count: int) -> float:
        return 100.0 * count / n if n else 0.0

    return Distributions(
        total=n,
        type_counts=type_counts,
        type_percent={t: pct(c) for t, c in type_counts.items()},
        class_counts=class_counts,
        class_percent={c: pct(v) for c, v in class_counts.items()},
        size_histogram=tuple(hist),
    )


def normalize_times(times: Sequence[float]) -> list[float]:
    """Min-max scale to [0, 1]; a constant series maps to all zeros."""
    if not times:
        return []
    lo, hi = min(times), max(times)
    if hi == lo:
        return [0.0] * len(times)
    span = hi - lo
    return [(t - lo) / span for t in times]


@dataclass(frozen=True)
class HeatmapGrid:
    """Counts of records per (distance bin, size bin); ``counts[d][s]``."""

    error_type: ErrorType
    counts: tuple[tuple[int, ...], ...]
    excluded: int  # records of this type without a distance

    @property
    def total(self) -> int:
        return sum(map(sum, self.counts))


def heatmap(records: Sequence[ResolutionRecord], error_type: ErrorType) -> HeatmapGrid:
    grid = [[0] * len(SIZE_BINS) for _ in DISTANCE_BINS]
    excluded = 0
    for r in records:
        if r.error_type is not error_type:
            continue
        if r.resolution_distance is None:
            excluded += 1
            continue
        grid[distance_bin(r.resolution_distance)][size_bin(r.resolution_size)] += 1
    return HeatmapGrid(error_type, tuple(map(tuple, grid)), excluded)

