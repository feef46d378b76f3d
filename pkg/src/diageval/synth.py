"""Synthetic cohorts with analytically known properties.

These generators are the verification oracles for the statistical modules:
the binormal family has a closed-form AUC, the calibrated family is
perfectly calibrated by construction (labels are Bernoulli draws of the
score), and the clinical family embeds a known logistic coefficient vector.
Latent binormal scores are squashed to [0,1] through the logistic function,
which is strictly monotone and therefore preserves every rank statistic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from .baseline import compute_siri
from .cohort import BloodPanel, CaseRecord, Cohort, Role
from .errors import InvalidSpec
from .rand import substream


@dataclass(frozen=True)
class BinormalSpec:
    n_pos: int
    n_neg: int
    mu_pos: float
    mu_neg: float
    sigma_pos: float = 1.0
    sigma_neg: float = 1.0
    seed: int = 0
    score_name: str = "score"

    def __post_init__(self):
        if self.n_pos < 2 or self.n_neg < 2:
            raise InvalidSpec("need at least 2 cases per class")
        if self.sigma_pos <= 0 or self.sigma_neg <= 0:
            raise InvalidSpec("sigmas must be positive")

    @property
    def true_auc(self) -> float:
        """Closed-form binormal AUC."""
        gap = self.mu_pos - self.mu_neg
        return float(norm.cdf(gap / np.hypot(self.sigma_pos, self.sigma_neg)))


def generate_binormal(spec: BinormalSpec) -> Cohort:
    """Cohort with one score column drawn from the binormal model."""
    rng = substream(spec.seed, 0)
    latent_pos = rng.normal(spec.mu_pos, spec.sigma_pos, spec.n_pos)
    latent_neg = rng.normal(spec.mu_neg, spec.sigma_neg, spec.n_neg)
    cases = []
    for i, latent in enumerate(latent_pos):
        cases.append(
            CaseRecord(f"case-{i:06d}", 1, scores={spec.score_name: float(expit(latent))})
        )
    for i, latent in enumerate(latent_neg, start=spec.n_pos):
        cases.append(
            CaseRecord(f"case-{i:06d}", 0, scores={spec.score_name: float(expit(latent))})
        )
    return Cohort.from_cases(cases)


@dataclass(frozen=True)
class CalibratedSpec:
    n: int
    distribution: str = "uniform"  # "uniform", "beta", or "constant"
    beta_a: float = 1.0
    beta_b: float = 1.0
    value: float = 0.5  # constant distribution only
    seed: int = 0
    score_name: str = "score"

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSpec("n must be at least 1")
        if self.distribution not in ("uniform", "beta", "constant"):
            raise InvalidSpec(f"unknown score distribution {self.distribution!r}")
        if self.distribution == "beta" and (self.beta_a <= 0 or self.beta_b <= 0):
            raise InvalidSpec("beta shape parameters must be positive")
        if self.distribution == "constant" and not 0.0 <= self.value <= 1.0:
            raise InvalidSpec("constant score must lie in [0, 1]")


def generate_calibrated(spec: CalibratedSpec) -> Cohort:
    """Cohort whose labels are Bernoulli(score): perfectly calibrated."""
    rng = substream(spec.seed, 0)
    if spec.distribution == "uniform":
        scores = rng.random(spec.n)
    elif spec.distribution == "beta":
        scores = rng.beta(spec.beta_a, spec.beta_b, spec.n)
    else:
        scores = np.full(spec.n, spec.value)
    labels = rng.random(spec.n) < scores
    cases = [
        CaseRecord(f"case-{i:06d}", int(y), scores={spec.score_name: float(s)})
        for i, (s, y) in enumerate(zip(scores, labels))
    ]
    return Cohort.from_cases(cases)


@dataclass(frozen=True)
class UniformRange:
    lo: float
    hi: float

    def __post_init__(self):
        if not np.isfinite(self.lo) or not np.isfinite(self.hi) or self.lo >= self.hi:
            raise InvalidSpec(f"invalid range [{self.lo!r}, {self.hi!r}]")


DEFAULT_CLINICAL_FEATURES: dict[str, UniformRange] = {
    "pct_normal": UniformRange(0.0, 20.0),
    "neutrophils": UniformRange(2.0, 6.0),
    "monocytes": UniformRange(0.2, 0.8),
    "lymphocytes": UniformRange(1.0, 3.0),
}


def generate_clinical(
    n: int,
    true_betas: tuple[float, float, float],
    feature_distributions: Mapping[str, UniformRange] | None = None,
    seed: int = 0,
) -> Cohort:
    """Cohort with clinical features and labels from a known logistic model.

    Labels are Bernoulli(logistic(b0 + b1*pct_normal + b2*siri)); the
    generating coefficient vector is the oracle for fit recovery tests.
    """
    if n < 1:
        raise InvalidSpec("n must be at least 1")
    if len(true_betas) != 3:
        raise InvalidSpec("true_betas must be (intercept, pct_normal, siri)")
    dists = dict(DEFAULT_CLINICAL_FEATURES)
    if feature_distributions:
        dists.update(feature_distributions)
    pct_range = dists["pct_normal"]
    if pct_range.lo < 0 or pct_range.hi > 100:
        raise InvalidSpec("pct_normal range must stay inside [0, 100]")
    for name in ("neutrophils", "monocytes"):
        if dists[name].lo < 0:
            raise InvalidSpec(f"{name} range must be non-negative")
    if dists["lymphocytes"].lo <= 0:
        raise InvalidSpec("lymphocytes range must be strictly positive")

    rng = substream(seed, 0)
    pct = rng.uniform(pct_range.lo, pct_range.hi, n)
    neut = rng.uniform(dists["neutrophils"].lo, dists["neutrophils"].hi, n)
    mono = rng.uniform(dists["monocytes"].lo, dists["monocytes"].hi, n)
    lymph = rng.uniform(dists["lymphocytes"].lo, dists["lymphocytes"].hi, n)

    b0, b1, b2 = true_betas
    cases = []
    for i in range(n):
        panel = BloodPanel(float(neut[i]), float(mono[i]), float(lymph[i]))
        p = expit(b0 + b1 * pct[i] + b2 * compute_siri(panel))
        label = int(rng.random() < p)
        cases.append(
            CaseRecord(
                f"case-{i:06d}", label, pct_normal=float(pct[i]), blood=panel
            )
        )
    return Cohort.from_cases(cases, role=Role.TRAIN)


@dataclass(frozen=True)
class DemoSpec:
    """Two score columns over shared labels plus clinical features.

    Model separations are chosen so the demo shows a clearly stronger and a
    clearly weaker model (latent gaps 2.4 and 0.9 between classes).
    """

    n: int = 600
    prevalence: float = 0.3
    seed: int = 7
    model_a: str = "model_a"
    model_b: str = "model_b"
    gap_a: float = 2.4
    gap_b: float = 0.9


def generate_demo(spec: DemoSpec = DemoSpec()) -> Cohort:
    """Deterministic demo cohort used by the README walkthrough and tests."""
    rng = substream(spec.seed, 0)
    n = spec.n
    labels = rng.random(n) < spec.prevalence
    score_a = expit(rng.normal(0.0, 1.0, n) + spec.gap_a * labels - spec.gap_a / 2.0)
    score_b = expit(rng.normal(0.0, 1.0, n) + spec.gap_b * labels - spec.gap_b / 2.0)
    pct = np.clip(rng.normal(6.0 + 5.0 * labels, 3.0), 0.0, 100.0)
    neut = rng.uniform(2.0, 6.0, n)
    mono = rng.uniform(0.2, 0.8, n)
    lymph = rng.uniform(1.0, 3.0, n)
    cases = [
        CaseRecord(
            f"demo-{i:05d}",
            int(labels[i]),
            pct_normal=float(pct[i]),
            blood=BloodPanel(float(neut[i]), float(mono[i]), float(lymph[i])),
            scores={spec.model_a: float(score_a[i]), spec.model_b: float(score_b[i])},
        )
        for i in range(n)
    ]
    return Cohort.from_cases(cases)
