"""ROC and precision-recall curves and their areas.

Tied scores collapse into a single curve vertex (midrank logic), so every
result is invariant under permutation of the input. The ROC area is the
trapezoidal integral and equals the tie-corrected Mann-Whitney statistic;
the PR area is the step-wise average-precision integral, which never
interpolates between points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import EmptyCohort, InputError, LengthMismatch, NoPositives, SingleClass


class CurveKind(str, Enum):
    ROC = "roc"
    PR = "pr"


class CurvePoint(NamedTuple):
    x: float
    y: float
    threshold: float


@dataclass(frozen=True)
class CurveSeries:
    kind: CurveKind
    points: tuple[CurvePoint, ...]
    area: float


def _ranked_counts(scores, labels) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct thresholds (descending) with cumulative TP/FP at score >= t."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape:
        raise LengthMismatch(scores.size, labels.size)
    if scores.size == 0:
        raise EmptyCohort("no scored cases")
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    # last index of each tie block
    last = np.nonzero(np.append(s[1:] != s[:-1], True))[0]
    cum_tp = np.cumsum(y)[last].astype(float)
    cum_fp = (last + 1) - cum_tp
    return s[last], cum_tp, cum_fp


def roc_curve(scores, labels) -> CurveSeries:
    """ROC series from (0,0) to (1,1), one vertex per distinct score."""
    thresholds, cum_tp, cum_fp = _ranked_counts(scores, labels)
    n_pos = cum_tp[-1]
    n_neg = cum_fp[-1]
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC requires both classes")
    points = [CurvePoint(0.0, 0.0, math.inf)]
    points.extend(
        CurvePoint(float(fp / n_neg), float(tp / n_pos), float(t))
        for t, tp, fp in zip(thresholds, cum_tp, cum_fp)
    )
    series = CurveSeries(kind=CurveKind.ROC, points=tuple(points), area=0.0)
    return CurveSeries(kind=CurveKind.ROC, points=series.points, area=auc(series))


def auc(curve: CurveSeries) -> float:
    """Trapezoidal area under an ROC series."""
    if curve.kind is not CurveKind.ROC:
        raise InputError("auc is defined for ROC series; PR series carry their own area")
    xs = np.array([p.x for p in curve.points])
    ys = np.array([p.y for p in curve.points])
    return float(np.sum(np.diff(xs) * (ys[1:] + ys[:-1]) / 2.0))


def pr_curve(scores, labels) -> CurveSeries:
    """Precision-recall series with the average-precision step integral."""
    thresholds, cum_tp, cum_fp = _ranked_counts(scores, labels)
    n_pos = cum_tp[-1]
    if n_pos == 0:
        raise NoPositives("PR curve requires at least one positive case")
    recall = cum_tp / n_pos
    precision = cum_tp / (cum_tp + cum_fp)
    points = tuple(
        CurvePoint(float(r), float(p), float(t))
        for t, r, p in zip(thresholds, recall, precision)
    )
    area = float(np.sum(np.diff(np.concatenate(([0.0], recall))) * precision))
    return CurveSeries(kind=CurveKind.PR, points=points, area=area)
