"""Reliability curves and expected calibration error.

Bins are half-open [lo, hi) with the final bin closed at 1.0. Empty bins
are reported (n=0, undefined frequency) rather than skipped, so curves for
different models stay comparable bin-for-bin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AllBinsEmpty, EmptyCohort, InputError, InvalidBinCount, LengthMismatch


@dataclass(frozen=True)
class ReliabilityBin:
    lo: float
    hi: float
    n: int
    mean_predicted: float | None
    observed_frequency: float | None


def _bin_edges(scores: np.ndarray, binning: str, n_bins: int) -> np.ndarray:
    if binning == "equal_width":
        return np.linspace(0.0, 1.0, n_bins + 1)
    if binning == "quantile":
        # interior edges at score quantiles; outer edges pinned to [0, 1] so
        # the bins always partition the unit interval even when the score
        # distribution is heavily concentrated (duplicate quantiles merge)
        interior = np.quantile(scores, np.linspace(0.0, 1.0, n_bins + 1)[1:-1])
        edges = np.unique(np.concatenate(([0.0], interior, [1.0])))
        return edges
    raise InputError(f"binning must be 'equal_width' or 'quantile', got {binning!r}")


def reliability_curve(
    scores, labels, *, binning: str = "equal_width", n_bins: int = 10
) -> list[ReliabilityBin]:
    """Binned predicted probability vs observed outcome frequency."""
    if n_bins < 2:
        raise InvalidBinCount(f"need at least 2 bins, got {n_bins}")
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape:
        raise LengthMismatch(scores.size, labels.size)
    if scores.size == 0:
        raise EmptyCohort("no scored cases")

    edges = _bin_edges(scores, binning, n_bins)
    # right-open bins, except the last which absorbs 1.0
    index = np.clip(np.searchsorted(edges, scores, side="right") - 1, 0, len(edges) - 2)
    bins = []
    for b in range(len(edges) - 1):
        mask = index == b
        count = int(mask.sum())
        # summing in sorted order makes the bin means exactly
        # permutation-invariant, not just up to float rounding
        bins.append(
            ReliabilityBin(
                lo=float(edges[b]),
                hi=float(edges[b + 1]),
                n=count,
                mean_predicted=float(np.sort(scores[mask]).mean()) if count else None,
                observed_frequency=float(labels[mask].sum() / count) if count else None,
            )
        )
    return bins


def expected_calibration_error(bins: Sequence[ReliabilityBin]) -> float:
    """Bin-weighted mean absolute gap between prediction and observation."""
    total = sum(b.n for b in bins)
    if total == 0:
        raise AllBinsEmpty("every reliability bin is empty")
    return float(
        sum(
            (b.n / total) * abs(b.observed_frequency - b.mean_predicted)
            for b in bins
            if b.n > 0
        )
    )
