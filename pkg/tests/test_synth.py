import numpy as np
import pytest
from scipy.special import logit
from scipy.stats import norm

from diageval.baseline import fit_logistic
from diageval.calibration import expected_calibration_error, reliability_curve
from diageval.cohort import prevalence
from diageval.curves import roc_curve
from diageval.errors import InvalidSpec
from diageval.synth import (
    BinormalSpec,
    CalibratedSpec,
    DemoSpec,
    UniformRange,
    generate_binormal,
    generate_calibrated,
    generate_clinical,
    generate_demo,
)


class TestBinormal:
    def test_spec_validation(self):
        with pytest.raises(InvalidSpec):
            BinormalSpec(1, 10, 1.0, 0.0)
        with pytest.raises(InvalidSpec):
            BinormalSpec(10, 10, 1.0, 0.0, sigma_pos=0.0)

    def test_true_auc_closed_form(self):
        spec = BinormalSpec(10, 10, 1.0, 0.0)
        assert spec.true_auc == pytest.approx(norm.cdf(1 / np.sqrt(2)))

    def test_deterministic_per_seed(self):
        spec = BinormalSpec(50, 150, 1.0, 0.0, seed=5)
        assert generate_binormal(spec) == generate_binormal(spec)
        other = generate_binormal(BinormalSpec(50, 150, 1.0, 0.0, seed=6))
        assert other != generate_binormal(spec)

    def test_exchangeable_classes_auc_near_half(self):
        cohort = generate_binormal(BinormalSpec(4000, 4000, 0.7, 0.7, seed=1))
        scores, labels, _ = cohort.score_column("score")
        assert roc_curve(scores, labels).area == pytest.approx(0.5, abs=0.02)

    def test_unit_gap_auc_near_closed_form(self):
        cohort = generate_binormal(BinormalSpec(10_000, 10_000, 1.0, 0.0, seed=3))
        scores, labels, _ = cohort.score_column("score")
        assert roc_curve(scores, labels).area == pytest.approx(
            norm.cdf(1 / np.sqrt(2)), abs=0.01
        )

    def test_wide_gap_saturates(self):
        cohort = generate_binormal(BinormalSpec(500, 500, 6.0, 0.0, seed=2))
        scores, labels, _ = cohort.score_column("score")
        assert roc_curve(scores, labels).area > 0.995

    def test_logistic_squash_preserves_ranks(self):
        cohort = generate_binormal(BinormalSpec(200, 300, 1.0, 0.0, seed=4))
        scores, labels, _ = cohort.score_column("score")
        assert np.all(scores > 0) and np.all(scores < 1)
        latent = logit(scores)
        assert roc_curve(latent, labels).area == pytest.approx(
            roc_curve(scores, labels).area, abs=1e-12
        )


class TestCalibrated:
    def test_constant_one_all_positive(self):
        cohort = generate_calibrated(CalibratedSpec(50, "constant", value=1.0, seed=1))
        assert all(c.label == 1 for c in cohort.cases)

    def test_constant_zero_all_negative(self):
        cohort = generate_calibrated(CalibratedSpec(50, "constant", value=0.0, seed=1))
        assert all(c.label == 0 for c in cohort.cases)

    def test_uniform_scores_low_ece(self):
        cohort = generate_calibrated(CalibratedSpec(20_000, seed=8))
        scores, labels, _ = cohort.score_column("score")
        bins = reliability_curve(scores, labels, n_bins=10)
        assert expected_calibration_error(bins) <= 0.03

    def test_spec_validation(self):
        with pytest.raises(InvalidSpec):
            CalibratedSpec(0)
        with pytest.raises(InvalidSpec):
            CalibratedSpec(10, "triangular")
        with pytest.raises(InvalidSpec):
            CalibratedSpec(10, "beta", beta_a=-1.0)
        with pytest.raises(InvalidSpec):
            CalibratedSpec(10, "constant", value=1.5)

    def test_deterministic_per_seed(self):
        spec = CalibratedSpec(200, seed=12)
        assert generate_calibrated(spec) == generate_calibrated(spec)


class TestClinical:
    def test_zero_betas_balanced(self):
        cohort = generate_clinical(20_000, (0.0, 0.0, 0.0), seed=1)
        assert prevalence(cohort) == pytest.approx(0.5, abs=0.02)

    def test_fit_recovers_generator_smoke(self):
        cohort = generate_clinical(8000, (-4.0, 0.5, -0.8), seed=3)
        fit = fit_logistic(cohort)
        for fitted, truth in zip(fit.coefficients, (-4.0, 0.5, -0.8)):
            assert fitted == pytest.approx(truth, abs=0.2)

    def test_invalid_specs(self):
        with pytest.raises(InvalidSpec):
            generate_clinical(0, (0.0, 0.0, 0.0))
        with pytest.raises(InvalidSpec):
            generate_clinical(10, (0.0, 0.0))
        with pytest.raises(InvalidSpec):
            generate_clinical(
                10, (0.0, 0.0, 0.0),
                {"lymphocytes": UniformRange(0.0, 1.0)},  # zero lymphocytes possible
            )
        with pytest.raises(InvalidSpec):
            generate_clinical(
                10, (0.0, 0.0, 0.0), {"pct_normal": UniformRange(-5.0, 10.0)}
            )

    def test_cases_carry_features(self):
        cohort = generate_clinical(20, (-1.0, 0.2, -0.4), seed=3)
        case = cohort.cases[0]
        assert case.pct_normal is not None
        assert case.blood is not None
        assert cohort.role.value == "train"

    def test_deterministic_per_seed(self):
        a = generate_clinical(100, (-1.0, 0.2, -0.4), seed=9)
        b = generate_clinical(100, (-1.0, 0.2, -0.4), seed=9)
        assert a == b


class TestDemo:
    def test_deterministic(self):
        assert generate_demo() == generate_demo()
        assert generate_demo(DemoSpec(seed=8)) != generate_demo(DemoSpec(seed=7))

    def test_two_models_and_features(self):
        cohort = generate_demo()
        names = cohort.score_names()
        assert names == ("model_a", "model_b")
        assert all(c.pct_normal is not None and c.blood is not None for c in cohort)

    def test_model_a_clearly_stronger(self):
        cohort = generate_demo()
        sa, ya, _ = cohort.score_column("model_a")
        sb, yb, _ = cohort.score_column("model_b")
        assert roc_curve(sa, ya).area > roc_curve(sb, yb).area + 0.1
