import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diageval.errors import AllUndefined, EmptyCohort, LengthMismatch, OutOfRange
from diageval.thresholds import (
    DEFAULT_SWEEP_GRID,
    ConfusionCounts,
    MetricBundle,
    SweepRow,
    best_f1_operating_point,
    confusion_at,
    metrics_from,
    threshold_sweep,
)

from _oracles import enumerate_confusion


class TestConfusionAt:
    def test_threshold_zero_flags_everything(self):
        # 29 positives, 690 negatives, all scores >= 0
        scores = np.concatenate([np.full(29, 0.03), np.full(690, 0.01)])
        labels = np.concatenate([np.ones(29, int), np.zeros(690, int)])
        c = confusion_at(scores, labels, 0.0)
        assert (c.tp, c.fp, c.tn, c.fn) == (29, 690, 0, 0)

    def test_all_positive_below_min(self):
        c = confusion_at([0.5, 0.6, 0.9], [1, 1, 1], 0.1)
        assert c.fp == 0 and c.tn == 0

    def test_hand_enumerated_four_cases(self):
        c = confusion_at([0.9, 0.4, 0.5, 0.1], [1, 1, 0, 0], 0.45)
        assert (c.tp, c.fn, c.fp, c.tn) == (1, 1, 1, 1)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            confusion_at([0.1, 0.2], [1], 0.5)

    def test_empty_rejected(self):
        with pytest.raises(EmptyCohort):
            confusion_at([], [], 0.5)

    @given(
        st.lists(
            st.tuples(
                st.integers(0, 10).map(lambda v: v / 10.0), st.integers(0, 1)
            ),
            min_size=1,
            max_size=12,
        ),
        st.integers(0, 10).map(lambda v: v / 10.0),
    )
    def test_matches_brute_force_enumeration(self, rows, t):
        scores = [s for s, _ in rows]
        labels = [y for _, y in rows]
        c = confusion_at(scores, labels, t)
        assert (c.tp, c.fp, c.tn, c.fn) == enumerate_confusion(scores, labels, t)


class TestMetricsFrom:
    def test_who_threshold_zero_row(self):
        m = metrics_from(ConfusionCounts(29, 690, 0, 0, 0.0))
        assert m.f1 == pytest.approx(58 / 748)
        assert f"{m.f1:.2f}" == "0.08"
        assert m.sensitivity == 1.0
        assert m.specificity == 0.0
        assert m.npv is None  # tn + fn == 0

    def test_who_threshold_point_one_row(self):
        # counts back-solved from the threshold-0.1 operating point over N=719
        m = metrics_from(ConfusionCounts(2, 12, 678, 27, 0.1))
        assert m.sensitivity == pytest.approx(2 / 29)
        assert f"{m.sensitivity:.2f}" == "0.07"
        assert f"{m.specificity:.3f}" == "0.983"
        assert f"{m.ppv:.3f}" == "0.143"
        assert f"{m.npv:.3f}" == "0.962"
        assert f"{m.f1:.2f}" == "0.09"
        assert m.flagged_fraction == pytest.approx(14 / 719)
        assert f"{100 * m.flagged_fraction:.1f}" == "1.9"

    def test_cnn_subset_row(self):
        # counts back-solved from the 33-case evaluable subset
        m = metrics_from(ConfusionCounts(24, 1, 7, 1, 0.4))
        assert m.sensitivity == pytest.approx(0.96)
        assert m.specificity == pytest.approx(0.875)
        assert f"{m.ppv:.3f}" == "0.960"
        assert f"{m.npv:.3f}" == "0.875"
        assert f"{m.f1:.2f}" == "0.96"
        assert f"{100 * m.flagged_fraction:.1f}" == "75.8"

    def test_undefined_ppv_state(self):
        m = metrics_from(ConfusionCounts(0, 0, 30, 5, 0.5))
        assert m.ppv is None
        assert m.sensitivity == 0.0

    @given(
        st.tuples(st.integers(0, 30), st.integers(0, 30),
                  st.integers(0, 30), st.integers(0, 30)).filter(lambda t: sum(t) > 0)
    )
    def test_accuracy_complements_misclassification(self, counts):
        tp, fp, tn, fn = counts
        m = metrics_from(ConfusionCounts(tp, fp, tn, fn, 0.5))
        n = tp + fp + tn + fn
        assert m.accuracy == pytest.approx(1.0 - (fp + fn) / n)
        assert m.flagged_fraction == pytest.approx((tp + fp) / n)


class TestSweep:
    def who_like(self):
        # 719 cases; 14 (2 pos, 12 neg) sit just above 0.1, the rest below
        scores = np.concatenate(
            [np.full(2, 0.15), np.full(27, 0.05), np.full(12, 0.12), np.full(678, 0.02)]
        )
        labels = np.concatenate(
            [np.ones(2, int), np.ones(27, int), np.zeros(12, int), np.zeros(678, int)]
        )
        return scores, labels

    def test_rows_above_score_ceiling_undefined(self):
        scores, labels = self.who_like()
        rows = threshold_sweep(scores, labels, (0.1, 0.2, 0.3, 0.4, 0.5))
        assert rows[0].metrics.sensitivity == pytest.approx(2 / 29)
        for row in rows[1:]:
            assert row.metrics.sensitivity == 0.0
            assert row.metrics.ppv is None
            assert row.metrics.specificity == 1.0

    def test_empty_grid(self):
        assert threshold_sweep([0.5], [1], ()) == []

    def test_grid_domain_checked(self):
        with pytest.raises(OutOfRange):
            threshold_sweep([0.5], [1], (0.0, 1.0 + 1e-9))
        with pytest.raises(OutOfRange):
            threshold_sweep([0.5], [1], (0.5, 0.1))

    def test_flagged_fraction_non_increasing(self):
        rng = np.random.default_rng(0)
        scores = rng.random(200)
        labels = rng.integers(0, 2, 200)
        rows = threshold_sweep(scores, labels, DEFAULT_SWEEP_GRID)
        flagged = [r.metrics.flagged_fraction for r in rows]
        assert all(a >= b for a, b in zip(flagged, flagged[1:]))

    @given(
        st.lists(st.tuples(st.floats(0, 1, allow_nan=False), st.integers(0, 1)),
                 min_size=2, max_size=30).filter(
            lambda rows: 0 < sum(y for _, y in rows) < len(rows))
    )
    def test_sensitivity_specificity_monotone(self, rows):
        scores = [s for s, _ in rows]
        labels = [y for _, y in rows]
        sweep = threshold_sweep(scores, labels, DEFAULT_SWEEP_GRID)
        sens = [r.metrics.sensitivity for r in sweep]
        spec = [r.metrics.specificity for r in sweep]
        assert all(a >= b for a, b in zip(sens, sens[1:]))
        assert all(a <= b for a, b in zip(spec, spec[1:]))


def stub_row(threshold, f1):
    counts = ConfusionCounts(1, 1, 1, 1, threshold)
    metrics = MetricBundle(None, None, None, None, f1, None, None)
    return SweepRow(threshold, counts, metrics)


class TestBestF1:
    def test_tie_breaks_toward_larger_threshold(self):
        rows = [stub_row(t, f1) for t, f1 in
                zip((0.1, 0.2, 0.3, 0.4, 0.5), (0.92, 0.94, 0.94, 0.96, 0.96))]
        assert best_f1_operating_point(rows).threshold == 0.5

    def test_single_row(self):
        rows = [stub_row(0.3, 0.5)]
        assert best_f1_operating_point(rows) is rows[0]

    def test_all_undefined(self):
        rows = [stub_row(0.1, None), stub_row(0.2, None)]
        with pytest.raises(AllUndefined):
            best_f1_operating_point(rows)

    def test_real_sweep_end_to_end(self):
        scores = [0.9, 0.85, 0.7, 0.3, 0.2, 0.1]
        labels = [1, 1, 1, 0, 0, 0]
        rows = threshold_sweep(scores, labels, DEFAULT_SWEEP_GRID)
        best = best_f1_operating_point(rows)
        assert best.metrics.f1 == 1.0
        assert best.threshold == 0.5  # largest threshold achieving perfect F1
