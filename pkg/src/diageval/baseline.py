"""Clinical baseline model: inflammation index, strict-morphology rule, and
the logistic regression that maps clinical features to a probability score.

The baseline combines the percent of normal forms with the systemic
inflammation response index (SIRI = neutrophils x monocytes / lymphocytes)
in a plain maximum-likelihood logistic model:

    logit(P) = b0 + b1 * pct_normal + b2 * siri

Predictors are deliberately not standardized so the per-unit coefficients
stay clinically interpretable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import expit

from .cohort import BloodPanel, CaseRecord, Cohort
from .errors import (
    InputError,
    MissingFeature,
    NotConverged,
    OutOfRange,
    Separation,
    SingleClass,
    Singular,
    ZeroDenominator,
)

WHO_NORMAL_THRESHOLD_PCT = 4.0
DEFAULT_PREDICTORS = ("pct_normal", "siri")

# Probabilities are kept strictly inside (0,1); expit saturates to exactly
# 0.0/1.0 for |eta| beyond ~37 in float64.
_P_FLOOR = float(np.nextafter(0.0, 1.0))
_P_CEIL = float(np.nextafter(1.0, 0.0))


class MorphologyClass(str, Enum):
    NORMAL = "normal"
    TERATOZOOSPERMIC = "teratozoospermic"


def compute_siri(panel: BloodPanel) -> float:
    """Systemic inflammation response index from a blood differential."""
    if panel.lymphocytes == 0:
        raise ZeroDenominator("lymphocyte count is zero; SIRI undefined")
    return panel.neutrophils * panel.monocytes / panel.lymphocytes


def who_strict_flag(pct_normal: float) -> MorphologyClass:
    """Classify by the strict-criteria rule: normal iff >= 4% normal forms."""
    if not (math.isfinite(pct_normal) and 0.0 <= pct_normal <= 100.0):
        raise OutOfRange(f"pct_normal must lie in [0, 100], got {pct_normal!r}")
    if pct_normal >= WHO_NORMAL_THRESHOLD_PCT:
        return MorphologyClass.NORMAL
    return MorphologyClass.TERATOZOOSPERMIC


def case_feature(case: CaseRecord, name: str) -> float:
    """Resolve a predictor value for one case.

    SIRI may be supplied directly or derived on the fly from the blood
    panel; anything absent raises MissingFeature rather than imputing.
    """
    if name == "pct_normal":
        value = case.pct_normal
    elif name == "siri":
        value = case.siri
        if value is None and case.blood is not None:
            value = compute_siri(case.blood)
    else:
        raise InputError(f"unknown predictor {name!r}")
    if value is None:
        raise MissingFeature(case.case_id, name)
    return float(value)


def design_matrix(cohort: Cohort, predictors: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Intercept-augmented design matrix and label vector."""
    x = np.empty((len(cohort), len(predictors) + 1))
    x[:, 0] = 1.0
    for j, name in enumerate(predictors, start=1):
        x[:, j] = [case_feature(case, name) for case in cohort.cases]
    y = cohort.labels.astype(float)
    return x, y


@dataclass(frozen=True)
class LogisticFit:
    """Fitted coefficients plus convergence diagnostics.

    `coefficients` holds the intercept first, then one value per predictor
    in the order given at fit time.
    """

    predictors: tuple[str, ...]
    coefficients: tuple[float, ...]
    std_errors: tuple[float, ...]
    n_iterations: int
    converged: bool
    final_deviance: float
    ridge: float = 0.0

    @property
    def beta0(self) -> float:
        return self.coefficients[0]

    @property
    def beta1(self) -> float:
        return self.coefficients[1]

    @property
    def beta2(self) -> float:
        return self.coefficients[2]

    def to_dict(self) -> dict:
        return {
            "predictors": list(self.predictors),
            "coefficients": list(self.coefficients),
            "std_errors": list(self.std_errors),
            "n_iterations": self.n_iterations,
            "converged": self.converged,
            "final_deviance": self.final_deviance,
            "ridge": self.ridge,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LogisticFit":
        return cls(
            predictors=tuple(payload["predictors"]),
            coefficients=tuple(float(v) for v in payload["coefficients"]),
            std_errors=tuple(float(v) for v in payload["std_errors"]),
            n_iterations=int(payload["n_iterations"]),
            converged=bool(payload["converged"]),
            final_deviance=float(payload["final_deviance"]),
            ridge=float(payload.get("ridge", 0.0)),
        )


def save_fit(fit: LogisticFit, path: str | Path) -> None:
    Path(path).write_text(json.dumps(fit.to_dict(), indent=2, sort_keys=True) + "\n")


def load_fit(path: str | Path) -> LogisticFit:
    return LogisticFit.from_dict(json.loads(Path(path).read_text()))


def _deviance(x: np.ndarray, y: np.ndarray, beta: np.ndarray, ridge: float) -> float:
    p = np.clip(expit(x @ beta), _P_FLOOR, _P_CEIL)
    dev = -2.0 * float(np.sum(y * np.log(p) + (1.0 - y) * np.log1p(-p)))
    if ridge > 0.0:
        dev += ridge * float(np.sum(beta[1:] ** 2))
    return dev


def log_likelihood(cohort: Cohort, predictors: Sequence[str], beta: Sequence[float]) -> float:
    """Bernoulli log-likelihood of `beta` on a cohort."""
    x, y = design_matrix(cohort, predictors)
    return -0.5 * _deviance(x, y, np.asarray(beta, dtype=float), ridge=0.0)


def score_vector(cohort: Cohort, predictors: Sequence[str], beta: Sequence[float]) -> np.ndarray:
    """Analytic gradient of the log-likelihood: X'(y - p)."""
    x, y = design_matrix(cohort, predictors)
    p = expit(x @ np.asarray(beta, dtype=float))
    return x.T @ (y - p)


def fit_logistic(
    train: Cohort,
    predictors: Sequence[str] = DEFAULT_PREDICTORS,
    *,
    tol: float = 1e-8,
    max_iter: int = 100,
    ridge: float = 0.0,
    separation_bound: float = 20.0,
) -> LogisticFit:
    """Maximum-likelihood logistic fit by iteratively reweighted least squares.

    Converges when the deviance changes by less than `tol` between Newton
    steps. Declares Separation when any coefficient magnitude passes
    `separation_bound` or the weighted Hessian turns numerically singular
    mid-iteration; a first-iteration singular Hessian means the design
    matrix itself is rank-deficient. `ridge` adds an optional L2 penalty on
    the non-intercept coefficients (off by default) as a documented fallback
    for separated data.
    """
    predictors = tuple(predictors)
    x, y = design_matrix(train, predictors)
    n, k = x.shape
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == n:
        raise SingleClass("training cohort must contain both classes")
    if n <= k:
        raise InputError(f"need more cases ({n}) than coefficients ({k})")
    if ridge < 0.0:
        raise InputError("ridge penalty must be non-negative")

    beta = np.zeros(k)
    deviance = _deviance(x, y, beta, ridge)
    converged = False
    iteration = 0
    ridge_matrix = ridge * np.diag([0.0] + [1.0] * (k - 1))

    for iteration in range(1, max_iter + 1):
        p = expit(x @ beta)
        w = p * (1.0 - p)
        gradient = x.T @ (y - p)
        hessian = x.T @ (x * w[:, None])
        if ridge > 0.0:
            gradient -= ridge_matrix @ beta
            hessian += ridge_matrix
        try:
            step = np.linalg.solve(hessian, gradient)
        except np.linalg.LinAlgError:
            if iteration == 1:
                raise Singular("design matrix is rank-deficient") from None
            raise Separation(
                "weighted Hessian became singular; data are likely separated"
            ) from None
        beta = beta + step
        if np.max(np.abs(beta)) > separation_bound:
            raise Separation(
                f"coefficient magnitude exceeded {separation_bound:g}; "
                "the MLE appears to diverge (separated data)"
            )
        new_deviance = _deviance(x, y, beta, ridge)
        if abs(deviance - new_deviance) < tol:
            deviance = new_deviance
            converged = True
            break
        deviance = new_deviance

    if not converged:
        raise NotConverged(f"IRLS did not converge within {max_iter} iterations")

    p = expit(x @ beta)
    w = p * (1.0 - p)
    hessian = x.T @ (x * w[:, None])
    if ridge > 0.0:
        hessian += ridge_matrix
    try:
        covariance = np.linalg.inv(hessian)
    except np.linalg.LinAlgError:
        raise Separation("information matrix singular at the optimum") from None
    std_errors = tuple(float(v) for v in np.sqrt(np.diag(covariance)))

    return LogisticFit(
        predictors=predictors,
        coefficients=tuple(float(b) for b in beta),
        std_errors=std_errors,
        n_iterations=iteration,
        converged=converged,
        final_deviance=_deviance(x, y, beta, ridge=0.0),
        ridge=ridge,
    )


def predict_proba(fit: LogisticFit, case: CaseRecord) -> float:
    """Probability score for one case; strictly inside (0,1) for finite inputs."""
    eta = fit.coefficients[0]
    for name, coef in zip(fit.predictors, fit.coefficients[1:]):
        eta += coef * case_feature(case, name)
    return float(np.clip(expit(eta), _P_FLOOR, _P_CEIL))


def score_cohort(fit: LogisticFit, cohort: Cohort, *, skip_missing: bool = False) -> dict[str, float]:
    """Case-id -> probability for a whole cohort.

    With `skip_missing`, cases lacking a predictor are left out of the
    result (membership in the scored subset becomes data); otherwise the
    first missing feature raises.
    """
    out: dict[str, float] = {}
    for case in cohort.cases:
        try:
            out[case.case_id] = predict_proba(fit, case)
        except MissingFeature:
            if not skip_missing:
                raise
    return out
