"""Threshold-dependent metrics: confusion counts, metric bundles, sweeps.

A case is called positive when its score is >= the threshold (inclusive, so
threshold 0.0 flags every case). Metrics with a zero denominator are kept
explicitly undefined (None) instead of being coerced to 0 or NaN; renderers
show them as "--".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllUndefined, EmptyCohort, LengthMismatch, OutOfRange

DEFAULT_SWEEP_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.tn + self.fp


@dataclass(frozen=True)
class MetricBundle:
    """Threshold metrics; None marks a 0/0 denominator (rendered "--")."""

    sensitivity: float | None
    specificity: float | None
    ppv: float | None
    npv: float | None
    f1: float | None
    accuracy: float | None
    flagged_fraction: float | None


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    counts: ConfusionCounts
    metrics: MetricBundle


def _validated(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape:
        raise LengthMismatch(scores.size, labels.size)
    if scores.size == 0:
        raise EmptyCohort("no scored cases")
    return scores, labels


def confusion_at(scores, labels, threshold: float) -> ConfusionCounts:
    """Count TP/FP/TN/FN at one threshold (positive call: score >= threshold)."""
    scores, labels = _validated(scores, labels)
    called = scores >= threshold
    actual = labels == 1
    return ConfusionCounts(
        tp=int(np.sum(called & actual)),
        fp=int(np.sum(called & ~actual)),
        tn=int(np.sum(~called & ~actual)),
        fn=int(np.sum(~called & actual)),
        threshold=float(threshold),
    )


def _ratio(num: int, den: int) -> float | None:
    return num / den if den > 0 else None


def metrics_from(c: ConfusionCounts) -> MetricBundle:
    """Derive the metric bundle from confusion counts."""
    return MetricBundle(
        sensitivity=_ratio(c.tp, c.tp + c.fn),
        specificity=_ratio(c.tn, c.tn + c.fp),
        ppv=_ratio(c.tp, c.tp + c.fp),
        npv=_ratio(c.tn, c.tn + c.fn),
        f1=_ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn),
        accuracy=_ratio(c.tp + c.tn, c.n),
        flagged_fraction=_ratio(c.tp + c.fp, c.n),
    )


def threshold_sweep(scores, labels, grid=DEFAULT_SWEEP_GRID) -> list[SweepRow]:
    """One metrics row per threshold over a sorted grid in [0, 1]."""
    grid = [float(t) for t in grid]
    for t in grid:
        if not 0.0 <= t <= 1.0:
            raise OutOfRange(f"threshold {t!r} outside [0, 1]")
    if grid != sorted(grid):
        raise OutOfRange("threshold grid must be sorted ascending")
    rows = []
    for t in grid:
        counts = confusion_at(scores, labels, t)
        rows.append(SweepRow(threshold=t, counts=counts, metrics=metrics_from(counts)))
    return rows


def best_f1_operating_point(rows: list[SweepRow]) -> SweepRow:
    """Sweep row with maximal F1; ties break toward the larger threshold."""
    best: SweepRow | None = None
    for row in rows:
        f1 = row.metrics.f1
        if f1 is None:
            continue
        if (
            best is None
            or f1 > best.metrics.f1
            or (f1 == best.metrics.f1 and row.threshold > best.threshold)
        ):
            best = row
    if best is None:
        raise AllUndefined("no threshold in the sweep has a defined F1")
    return best
