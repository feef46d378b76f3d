"""Exception hierarchy for the toolkit.

Errors fall into two broad families so the CLI can map them to exit codes:
``InputError`` for bad files, arguments, or schema problems (exit 2), and
``DegenerateDataError`` for data that is too degenerate for the requested
statistic (exit 3). Anything else escaping a command is an internal error
(exit 4).
"""

from __future__ import annotations


class DiagevalError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.stage: str | None = None

    def with_stage(self, stage: str) -> "DiagevalError":
        """Annotate this error with the pipeline stage it escaped from."""
        self.stage = stage
        self.args = (f"[stage: {stage}] {self.args[0] if self.args else ''}",)
        return self


class InputError(DiagevalError):
    """Bad input data, arguments, or schema (CLI exit code 2)."""


class DegenerateDataError(DiagevalError):
    """Data too degenerate for the requested statistic (CLI exit code 3)."""


# cohort ingestion

class MissingColumn(InputError):
    def __init__(self, column: str):
        super().__init__(f"required column {column!r} not found in header")
        self.column = column


class MalformedValue(InputError):
    def __init__(self, row: int, column: str, value: str, reason: str = ""):
        detail = f": {reason}" if reason else ""
        super().__init__(
            f"malformed value {value!r} in column {column!r} at line {row}{detail}"
        )
        self.row = row
        self.column = column
        self.value = value


class DuplicateCaseId(InputError):
    def __init__(self, case_id: str):
        super().__init__(f"duplicate case id {case_id!r}")
        self.case_id = case_id


class EmptyCohort(InputError):
    def __init__(self, message: str = "cohort contains no cases"):
        super().__init__(message)


# baseline model

class ZeroDenominator(InputError):
    """SIRI is undefined when the lymphocyte count is zero."""


class OutOfRange(InputError):
    """A value fell outside its documented domain."""


class MissingFeature(InputError):
    def __init__(self, case_id: str, feature: str):
        super().__init__(f"case {case_id!r} is missing feature {feature!r}")
        self.case_id = case_id
        self.feature = feature


class Separation(DegenerateDataError):
    """The logistic MLE diverged (quasi-)completely separated data."""


class Singular(DegenerateDataError):
    """Design matrix is rank-deficient."""


class NotConverged(DegenerateDataError):
    """Iteration limit reached before the fit converged."""


# threshold metrics and curves

class LengthMismatch(InputError):
    def __init__(self, n_scores: int, n_labels: int):
        super().__init__(f"{n_scores} scores vs {n_labels} labels")
        self.n_scores = n_scores
        self.n_labels = n_labels


class AllUndefined(DegenerateDataError):
    """Every candidate value of the requested metric is undefined."""


class SingleClass(DegenerateDataError):
    """Both outcome classes are required but only one is present."""


class NoPositives(DegenerateDataError):
    """At least one positive case is required."""


# inference

class InvalidReplicateCount(InputError):
    """Bootstrap replicate count below the supported minimum."""


class TooManyDegenerateReplicates(DegenerateDataError):
    def __init__(self, attempts: int, cap: int):
        super().__init__(
            f"gave up after {attempts} resample attempts (cap {cap}); "
            "the statistic is undefined on too many resamples"
        )
        self.attempts = attempts
        self.cap = cap


class DegenerateClassSize(DegenerateDataError):
    """DeLong variance needs at least two cases in each class."""


class ZeroVariance(DegenerateDataError):
    """The variance of the AUC difference is zero for distinct AUCs."""


# calibration

class InvalidBinCount(InputError):
    """Reliability curves need at least two bins."""


class AllBinsEmpty(DegenerateDataError):
    """Calibration error is undefined when every bin is empty."""


# decision curves

class ThresholdOutOfRange(InputError):
    """Net benefit is defined for threshold probabilities strictly inside (0,1)."""


# synthetic cohorts

class InvalidSpec(InputError):
    """Synthetic cohort specification violates its own constraints."""
