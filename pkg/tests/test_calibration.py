import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diageval.calibration import (
    ReliabilityBin,
    expected_calibration_error,
    reliability_curve,
)
from diageval.errors import (
    AllBinsEmpty,
    EmptyCohort,
    InputError,
    InvalidBinCount,
    LengthMismatch,
)


class TestReliabilityCurve:
    def test_hand_binned_two_clusters(self):
        scores = [0.05] * 4 + [0.95] * 4
        labels = [1, 0, 0, 0, 1, 1, 1, 0]
        bins = reliability_curve(scores, labels, n_bins=10)
        assert len(bins) == 10
        first, last = bins[0], bins[-1]
        assert (first.n, first.mean_predicted, first.observed_frequency) == (4, 0.05, 0.25)
        assert (last.n, last.mean_predicted, last.observed_frequency) == (4, 0.95, 0.75)
        assert all(b.n == 0 for b in bins[1:-1])

    def test_constant_half_scores(self):
        bins = reliability_curve([0.5] * 8, [1, 0, 1, 0, 1, 0, 1, 0], n_bins=10)
        occupied = [b for b in bins if b.n > 0]
        assert len(occupied) == 1
        assert occupied[0].mean_predicted == 0.5
        assert occupied[0].observed_frequency == 0.5

    def test_counts_partition_cases(self):
        rng = np.random.default_rng(0)
        scores = rng.random(500)
        labels = rng.integers(0, 2, 500)
        bins = reliability_curve(scores, labels, n_bins=7)
        assert sum(b.n for b in bins) == 500

    def test_final_bin_closed_at_one(self):
        bins = reliability_curve([1.0, 0.0], [1, 0], n_bins=10)
        assert bins[-1].n == 1
        assert bins[0].n == 1

    def test_boundary_half_open(self):
        # 0.1 belongs to [0.1, 0.2), not [0.0, 0.1)
        bins = reliability_curve([0.1], [1], n_bins=10)
        assert bins[0].n == 0
        assert bins[1].n == 1

    def test_quantile_binning_adapts_to_mass(self):
        scores = np.concatenate([np.full(96, 0.02), np.linspace(0.5, 0.9, 4)])
        labels = np.zeros(100, int)
        labels[-2:] = 1
        bins = reliability_curve(scores, labels, binning="quantile", n_bins=4)
        assert sum(b.n for b in bins) == 100
        assert all(b.lo < b.hi for b in bins)

    def test_quantile_constant_scores_degrade_gracefully(self):
        bins = reliability_curve([0.5] * 10, [1] * 10, binning="quantile", n_bins=4)
        assert sum(b.n for b in bins) == 10

    def test_permutation_invariant(self):
        rng = np.random.default_rng(3)
        scores = rng.random(60)
        labels = rng.integers(0, 2, 60)
        perm = rng.permutation(60)
        assert reliability_curve(scores, labels) == reliability_curve(
            scores[perm], labels[perm]
        )

    def test_input_guards(self):
        with pytest.raises(InvalidBinCount):
            reliability_curve([0.5], [1], n_bins=1)
        with pytest.raises(EmptyCohort):
            reliability_curve([], [])
        with pytest.raises(LengthMismatch):
            reliability_curve([0.5], [1, 0])
        with pytest.raises(InputError):
            reliability_curve([0.5], [1], binning="eyeball")


class TestEce:
    def test_perfectly_calibrated_bins(self):
        bins = [
            ReliabilityBin(0.0, 0.5, 10, 0.3, 0.3),
            ReliabilityBin(0.5, 1.0, 10, 0.8, 0.8),
        ]
        assert expected_calibration_error(bins) == 0.0

    def test_single_bin_direct_formula(self):
        bins = [ReliabilityBin(0.0, 1.0, 5, 0.8, 0.3)]
        assert expected_calibration_error(bins) == pytest.approx(0.5)

    def test_two_bin_hand_arithmetic(self):
        scores = [0.05] * 4 + [0.95] * 4
        labels = [1, 0, 0, 0, 1, 1, 1, 0]
        bins = reliability_curve(scores, labels, n_bins=10)
        # 0.5*|0.25-0.05| + 0.5*|0.75-0.95| = 0.2
        assert expected_calibration_error(bins) == pytest.approx(0.2)

    def test_all_bins_empty(self):
        with pytest.raises(AllBinsEmpty):
            expected_calibration_error([ReliabilityBin(0.0, 1.0, 0, None, None)])

    @given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=50))
    def test_ece_in_unit_interval(self, scores):
        labels = [1 if s >= 0.5 else 0 for s in scores]
        bins = reliability_curve(scores, labels)
        assert 0.0 <= expected_calibration_error(bins) <= 1.0

    def test_zero_iff_every_bin_on_diagonal(self):
        on_diag = [
            ReliabilityBin(0.0, 0.5, 3, 0.2, 0.2),
            ReliabilityBin(0.5, 1.0, 0, None, None),
        ]
        assert expected_calibration_error(on_diag) == 0.0
        off_diag = on_diag[:1] + [ReliabilityBin(0.5, 1.0, 1, 0.9, 1.0)]
        assert expected_calibration_error(off_diag) > 0.0
