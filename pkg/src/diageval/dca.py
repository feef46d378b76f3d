"""Decision curve analysis: net benefit against treat-all and treat-none.

Net benefit at threshold probability t weighs false positives by the
threshold odds: NB(t) = TP/N - (FP/N) * t/(1-t), with a case called
positive when its score >= t (the threshold doubles as the score cutoff,
the standard convention; a fixed-cutoff mode is available for sensitivity
analysis). Treat-all follows the same formula with everyone positive and
treat-none is identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cohort import CaseRecord, Cohort
from .errors import InputError, LengthMismatch, ThresholdOutOfRange
from .inference import bootstrap_replicates, bca_levels, _bias_correction

DEFAULT_DCA_GRID = tuple(i / 100.0 for i in range(1, 51))


@dataclass(frozen=True)
class NetBenefitCurve:
    thresholds: tuple[float, ...]
    model_nb: tuple[float, ...]
    treat_all_nb: tuple[float, ...]
    bands: tuple[tuple[float, float], ...] | None = None

    treat_none_nb: float = 0.0

    def to_dict(self) -> dict:
        return {
            "thresholds": list(self.thresholds),
            "model_nb": list(self.model_nb),
            "treat_all_nb": list(self.treat_all_nb),
            "treat_none_nb": self.treat_none_nb,
            "bands": None if self.bands is None else [list(b) for b in self.bands],
        }


def _check_threshold(t: float) -> float:
    t = float(t)
    if not 0.0 < t < 1.0:
        raise ThresholdOutOfRange(f"threshold probability must lie in (0, 1), got {t!r}")
    return t


def net_benefit(scores, labels, t: float, *, cutoff: float | None = None) -> float:
    """Net benefit of the score-based rule at threshold probability t."""
    t = _check_threshold(t)
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape:
        raise LengthMismatch(scores.size, labels.size)
    if scores.size == 0:
        raise InputError("no scored cases")
    called = scores >= (t if cutoff is None else cutoff)
    n = scores.size
    tp = np.sum(called & (labels == 1))
    fp = np.sum(called & (labels == 0))
    return float(tp / n - (fp / n) * t / (1.0 - t))


def treat_all_net_benefit(prevalence: float, t: float) -> float:
    """Net benefit of treating everyone: pi - (1-pi) * t/(1-t)."""
    t = _check_threshold(t)
    return prevalence - (1.0 - prevalence) * t / (1.0 - t)


def dca_curve(
    scores,
    labels,
    grid: Sequence[float] = DEFAULT_DCA_GRID,
    *,
    bootstrap: tuple[int, int] | None = None,
    band_method: str = "percentile",
    cutoff: float | None = None,
) -> NetBenefitCurve:
    """Model, treat-all, and treat-none net benefit over a threshold grid.

    `bootstrap=(n, seed)` adds per-threshold (lo, hi) bands from
    subject-level resampling; `band_method` selects percentile (default)
    or BCa bands.
    """
    grid = [_check_threshold(t) for t in grid]
    if not grid:
        raise InputError("threshold grid is empty")
    if grid != sorted(grid):
        raise InputError("threshold grid must be sorted ascending")

    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    pi = float(np.mean(labels == 1))
    model_nb = tuple(net_benefit(scores, labels, t, cutoff=cutoff) for t in grid)
    treat_all = tuple(treat_all_net_benefit(pi, t) for t in grid)

    bands = None
    if bootstrap is not None:
        n_rep, seed = bootstrap
        bands = _bootstrap_bands(
            scores, labels, grid, n_rep, seed, band_method, cutoff, np.asarray(model_nb)
        )
    return NetBenefitCurve(
        thresholds=tuple(grid), model_nb=model_nb, treat_all_nb=treat_all, bands=bands
    )


def _bootstrap_bands(scores, labels, grid, n_rep, seed, method, cutoff, point):
    if method not in ("percentile", "bca"):
        raise InputError(f"band method must be 'percentile' or 'bca', got {method!r}")
    # wrap (score, label) pairs as a cohort for the shared resampler
    cases = tuple(
        CaseRecord(case_id=str(i), label=int(y), scores={"s": float(s)})
        for i, (s, y) in enumerate(zip(scores, labels))
    )
    holder = Cohort(cases=cases)

    thr = np.asarray(grid)
    odds = thr / (1.0 - thr)

    def statistic(c: Cohort) -> np.ndarray:
        s = np.array([case.scores["s"] for case in c.cases])
        y = np.array([case.label for case in c.cases])
        called = s[None, :] >= (thr[:, None] if cutoff is None else cutoff)
        n = s.size
        tp = (called & (y == 1)[None, :]).sum(axis=1)
        fp = (called & (y == 0)[None, :]).sum(axis=1)
        return tp / n - (fp / n) * odds

    values, _ = bootstrap_replicates(holder, statistic, n_rep, seed)
    matrix = np.vstack(values)  # replicates x thresholds

    level = 0.95
    if method == "percentile":
        lo = np.quantile(matrix, (1.0 - level) / 2.0, axis=0)
        hi = np.quantile(matrix, (1.0 + level) / 2.0, axis=0)
    else:
        lo = np.empty(len(grid))
        hi = np.empty(len(grid))
        accel = _jackknife_acceleration_vector(holder, statistic, len(grid))
        for k in range(len(grid)):
            column = matrix[:, k]
            if column.max() == column.min():
                lo[k] = hi[k] = column[0]
                continue
            z0 = _bias_correction(column, float(point[k]))
            q_lo, q_hi = bca_levels(z0, accel[k], level)
            lo[k] = np.quantile(column, q_lo)
            hi[k] = np.quantile(column, q_hi)
    return tuple((float(a), float(b)) for a, b in zip(lo, hi))


def _jackknife_acceleration_vector(holder: Cohort, statistic, width: int) -> np.ndarray:
    cases = holder.cases
    loo = np.empty((len(cases), width))
    for i in range(len(cases)):
        reduced = Cohort(cases=cases[:i] + cases[i + 1:])
        loo[i] = statistic(reduced)
    deltas = loo.mean(axis=0) - loo
    denom = np.sum(deltas**2, axis=0) ** 1.5
    accel = np.zeros(width)
    nonzero = denom > 0
    accel[nonzero] = np.sum(deltas**3, axis=0)[nonzero] / (6.0 * denom[nonzero])
    return accel
