"""Uncertainty for every estimate: subject-level bootstrap intervals and
DeLong variance/tests for AUC.

Bootstrap determinism contract: the interval is a pure function of
(cohort, statistic, n, seed, method). Replicate r draws its resample from
the substream (seed, r, attempt), so results are identical across runs and
across any number of workers. Replicates on which the statistic is
undefined (it raises a degeneracy error or returns NaN) are redrawn from
the next attempt substream, with the total attempt budget capped at 10n.

DeLong variance comes from the structural components: with placement value
V10_i = Pr(positive i outranks a random negative) and V01_j likewise per
negative, var(AUC) = S10/m + S01/n for sample variances S10, S01 and class
sizes m, n. Paired comparisons add the analogous covariance term.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import norm

from .cohort import Cohort
from .errors import (
    DegenerateClassSize,
    DegenerateDataError,
    InputError,
    InvalidReplicateCount,
    LengthMismatch,
    SingleClass,
    TooManyDegenerateReplicates,
    ZeroVariance,
)
from .rand import substream

RETRY_FACTOR = 10  # total resample attempts allowed: RETRY_FACTOR * n


@dataclass(frozen=True)
class IntervalEstimate:
    """Point estimate with two-sided confidence bounds.

    `notes` reports contract violations (point outside the interval,
    bounds clipped to the statistic's natural range) instead of hiding
    them by clamping the point.
    """

    point: float
    lo: float
    hi: float
    method: str
    level: float = 0.95
    n_replicates: int | None = None
    seed: int | None = None
    n_redraws: int = 0
    replicate_std: float | None = None
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "point": self.point,
            "lo": self.lo,
            "hi": self.hi,
            "method": self.method,
            "level": self.level,
            "n_replicates": self.n_replicates,
            "seed": self.seed,
            "n_redraws": self.n_redraws,
            "replicate_std": self.replicate_std,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class DeLongResult:
    auc_a: float
    auc_b: float
    var_a: float
    var_b: float
    covariance: float
    z: float
    p_two_sided: float
    mode: str

    def to_dict(self) -> dict:
        return {
            "auc_a": self.auc_a,
            "auc_b": self.auc_b,
            "var_a": self.var_a,
            "var_b": self.var_b,
            "covariance": self.covariance,
            "z": self.z,
            "p_two_sided": self.p_two_sided,
            "mode": self.mode,
        }


# ---------------------------------------------------------------------------
# DeLong structural components


def _midranks(x: np.ndarray) -> np.ndarray:
    """Midranks (1-based); tied values share the average of their ranks."""
    order = np.argsort(x, kind="mergesort")
    z = x[order]
    n = len(x)
    block_start = np.empty(n, dtype=bool)
    block_start[0] = True
    block_start[1:] = z[1:] != z[:-1]
    starts = np.flatnonzero(block_start)
    ends = np.append(starts[1:], n)
    block_rank = (starts + ends - 1) / 2.0 + 1.0
    out = np.empty(n)
    out[order] = np.repeat(block_rank, ends - starts)
    return out


def placements(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """Per-positive and per-negative placement values (ties count half).

    The mean of either vector is the AUC.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape:
        raise LengthMismatch(scores.size, labels.size)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise SingleClass("both classes are required")
    combined = _midranks(np.concatenate([pos, neg]))
    v_pos = (combined[: len(pos)] - _midranks(pos)) / len(neg)
    v_neg = 1.0 - (combined[len(pos):] - _midranks(neg)) / len(pos)
    return v_pos, v_neg


def delong_variance(scores, labels) -> tuple[float, float]:
    """(AUC, variance of AUC) via the structural-component estimator."""
    v_pos, v_neg = placements(scores, labels)
    if len(v_pos) < 2 or len(v_neg) < 2:
        raise DegenerateClassSize("DeLong variance needs >= 2 cases per class")
    auc = float(v_pos.mean())
    var = float(v_pos.var(ddof=1) / len(v_pos) + v_neg.var(ddof=1) / len(v_neg))
    return auc, var


def delong_interval(scores, labels, level: float = 0.95) -> IntervalEstimate:
    """Wald interval for the AUC from the DeLong variance, clipped to [0,1]."""
    auc, var = delong_variance(scores, labels)
    half = float(norm.ppf(0.5 + level / 2.0)) * math.sqrt(var)
    lo, hi = auc - half, auc + half
    notes = []
    if lo < 0.0 or hi > 1.0:
        notes.append("bounds clipped to [0, 1]")
        lo, hi = max(lo, 0.0), min(hi, 1.0)
    return IntervalEstimate(
        point=auc, lo=lo, hi=hi, method="delong", level=level, notes=tuple(notes)
    )


def delong_compare(scores_a, scores_b, labels, *, mode: str, labels_b=None) -> DeLongResult:
    """Two-sided z test for a difference in AUC.

    paired: both score vectors cover the same cases (shared `labels`); the
    covariance of the two AUCs is estimated from paired placements.
    unpaired: independent (scores_a, labels) vs (scores_b, labels_b);
    covariance is zero.
    """
    if mode == "paired":
        if labels_b is not None:
            raise InputError("paired mode takes a single shared label vector")
        a = np.asarray(scores_a, dtype=float)
        b = np.asarray(scores_b, dtype=float)
        if a.shape != b.shape:
            raise LengthMismatch(a.size, b.size)
        vp_a, vn_a = placements(a, labels)
        vp_b, vn_b = placements(b, labels)
        if min(len(vp_a), len(vn_a)) < 2:
            raise DegenerateClassSize("DeLong variance needs >= 2 cases per class")
        m, n = len(vp_a), len(vn_a)
        var_a = float(vp_a.var(ddof=1) / m + vn_a.var(ddof=1) / n)
        var_b = float(vp_b.var(ddof=1) / m + vn_b.var(ddof=1) / n)
        cov = float(
            np.cov(vp_a, vp_b, ddof=1)[0, 1] / m + np.cov(vn_a, vn_b, ddof=1)[0, 1] / n
        )
        auc_a, auc_b = float(vp_a.mean()), float(vp_b.mean())
    elif mode == "unpaired":
        if labels_b is None:
            raise InputError("unpaired mode requires labels for the second model")
        auc_a, var_a = delong_variance(scores_a, labels)
        auc_b, var_b = delong_variance(scores_b, labels_b)
        cov = 0.0
    else:
        raise InputError(f"mode must be 'paired' or 'unpaired', got {mode!r}")

    diff = auc_a - auc_b
    var_diff = var_a + var_b - 2.0 * cov
    if var_diff <= 0.0:
        if diff == 0.0:
            z, p = 0.0, 1.0
        else:
            raise ZeroVariance(
                "AUC difference is nonzero but its estimated variance is zero"
            )
    else:
        z = diff / math.sqrt(var_diff)
        p = float(2.0 * norm.sf(abs(z)))
    return DeLongResult(
        auc_a=auc_a,
        auc_b=auc_b,
        var_a=var_a,
        var_b=var_b,
        covariance=cov,
        z=float(z),
        p_two_sided=p,
        mode=mode,
    )


# ---------------------------------------------------------------------------
# Bootstrap


def _is_defined(value) -> bool:
    return not np.any(np.isnan(np.asarray(value, dtype=float)))


def _one_replicate(
    cohort: Cohort,
    statistic: Callable[[Cohort], object],
    seed: int,
    index: int,
    cap: int,
):
    """Evaluate one replicate, redrawing while the statistic is undefined.

    Attempt k uses the substream (seed, index, k), so the outcome depends
    only on the replicate address, never on scheduling.
    """
    n = len(cohort.cases)
    attempts = 0
    while True:
        rng = substream(seed, index, attempts)
        attempts += 1
        idx = rng.integers(0, n, size=n)
        resample = Cohort(cases=tuple(cohort.cases[i] for i in idx), role=cohort.role)
        try:
            value = statistic(resample)
        except DegenerateDataError:
            value = None
        if value is not None and _is_defined(value):
            return value, attempts
        if attempts >= cap:
            raise TooManyDegenerateReplicates(attempts, cap)


def bootstrap_replicates(
    cohort: Cohort,
    statistic: Callable[[Cohort], object],
    n: int,
    seed: int,
    *,
    workers: int = 1,
) -> tuple[list, int]:
    """n replicate statistic values plus the number of extra redraws.

    The statistic may be vector-valued (used for per-threshold bands); it
    must be pure and reentrant. Raises TooManyDegenerateReplicates once the
    total attempt budget (10n) is exhausted.
    """
    if len(cohort.cases) == 0:
        raise InputError("cannot resample an empty cohort")
    cap = RETRY_FACTOR * n

    def run(index: int):
        return _one_replicate(cohort, statistic, seed, index, cap)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(n)))
    else:
        results = [run(i) for i in range(n)]

    total_attempts = sum(att for _, att in results)
    if total_attempts > cap:
        raise TooManyDegenerateReplicates(total_attempts, cap)
    return [value for value, _ in results], total_attempts - n


def bca_levels(z0: float, accel: float, level: float) -> tuple[float, float]:
    """Quantile levels adjusted for bias (z0) and acceleration.

    With z0 = accel = 0 this reduces exactly to the plain percentile levels.
    """
    alpha = (1.0 - level) / 2.0
    z_lo, z_hi = norm.ppf(alpha), norm.ppf(1.0 - alpha)
    adj_lo = norm.cdf(z0 + (z0 + z_lo) / (1.0 - accel * (z0 + z_lo)))
    adj_hi = norm.cdf(z0 + (z0 + z_hi) / (1.0 - accel * (z0 + z_hi)))
    return float(adj_lo), float(adj_hi)


def _bias_correction(values: np.ndarray, point: float) -> float:
    """z0 from the replicate mass below the point estimate (ties count half).

    The mass is kept strictly inside (0,1) so z0 stays finite; hitting the
    clamp only happens when every replicate falls on one side of the point.
    """
    b = len(values)
    frac = (np.sum(values < point) + 0.5 * np.sum(values == point)) / b
    frac = min(max(frac, 0.5 / b), 1.0 - 0.5 / b)
    return float(norm.ppf(frac))


def _jackknife_acceleration(
    cohort: Cohort, statistic: Callable[[Cohort], float]
) -> tuple[float, list[str]]:
    cases = cohort.cases
    loo = []
    for i in range(len(cases)):
        reduced = Cohort(cases=cases[:i] + cases[i + 1:], role=cohort.role)
        try:
            value = float(statistic(reduced))
        except DegenerateDataError:
            return 0.0, ["jackknife replicate degenerate; acceleration set to 0"]
        if math.isnan(value):
            return 0.0, ["jackknife replicate degenerate; acceleration set to 0"]
        loo.append(value)
    deltas = np.mean(loo) - np.asarray(loo)
    denom = float(np.sum(deltas**2)) ** 1.5
    if denom == 0.0:
        return 0.0, []
    return float(np.sum(deltas**3) / (6.0 * denom)), []


def bootstrap_ci(
    cohort: Cohort,
    statistic: Callable[[Cohort], float],
    n: int = 1000,
    seed: int = 0,
    method: str = "bca",
    *,
    level: float = 0.95,
    workers: int = 1,
) -> IntervalEstimate:
    """Subject-level bootstrap confidence interval for a scalar statistic.

    `method` is "percentile" or "bca" (bias-corrected and accelerated, the
    default; acceleration comes from the leave-one-out jackknife).
    """
    if n < 100:
        raise InvalidReplicateCount(f"need at least 100 replicates, got {n}")
    if method not in ("percentile", "bca"):
        raise InputError(f"method must be 'percentile' or 'bca', got {method!r}")

    point = float(statistic(cohort))
    values, n_redraws = bootstrap_replicates(cohort, statistic, n, seed, workers=workers)
    values = np.asarray(values, dtype=float)
    notes: list[str] = []

    if values.max() == values.min():
        # degenerate replicate distribution: the interval collapses
        lo = hi = float(values[0])
        replicate_std = 0.0
    else:
        replicate_std = float(values.std(ddof=1))
        if method == "percentile":
            q_lo, q_hi = (1.0 - level) / 2.0, (1.0 + level) / 2.0
        else:
            z0 = _bias_correction(values, point)
            accel, accel_notes = _jackknife_acceleration(cohort, statistic)
            notes.extend(accel_notes)
            q_lo, q_hi = bca_levels(z0, accel, level)
        lo = float(np.quantile(values, q_lo))
        hi = float(np.quantile(values, q_hi))

    if not lo <= point <= hi:
        notes.append("point estimate falls outside the interval")
    return IntervalEstimate(
        point=point,
        lo=lo,
        hi=hi,
        method=method,
        level=level,
        n_replicates=n,
        seed=seed,
        n_redraws=n_redraws,
        replicate_std=replicate_std,
        notes=tuple(notes),
    )
