"""Evaluation cohorts: case records, CSV ingestion, and schema validation.

A cohort is an ordered, immutable collection of cases. Each case carries a
binary outcome label (1 = morphologically normal, 0 = abnormal), optional
clinical features, and any number of model probability scores keyed by model
name. The CSV reader is strict: unparseable cells are hard errors, never
silently dropped rows, because silent drops would bias prevalence.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateCaseId,
    EmptyCohort,
    InputError,
    MalformedValue,
    MissingColumn,
)


class Role(str, Enum):
    TRAIN = "train"
    EVALUATE = "evaluate"


@dataclass(frozen=True)
class BloodPanel:
    """Differential blood counts, each in 1e9 cells/L.

    Construction requires finite, non-negative counts. A zero lymphocyte
    count is representable but rejected where the inflammation index is
    actually computed (it is the denominator).
    """

    neutrophils: float
    monocytes: float
    lymphocytes: float

    def __post_init__(self):
        for name in ("neutrophils", "monocytes", "lymphocytes"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v!r}")


@dataclass(frozen=True)
class CaseRecord:
    """One subject/image: identifier, outcome, features, and model scores."""

    case_id: str
    label: int
    pct_normal: float | None = None
    siri: float | None = None
    blood: BloodPanel | None = None
    scores: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")
        if self.pct_normal is not None and not 0.0 <= self.pct_normal <= 100.0:
            raise ValueError(f"pct_normal must lie in [0, 100], got {self.pct_normal!r}")
        if self.siri is not None and not (math.isfinite(self.siri) and self.siri >= 0):
            raise ValueError(f"siri must be finite and non-negative, got {self.siri!r}")
        for name, value in self.scores.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"score {name!r} must lie in [0, 1], got {value!r}")
        object.__setattr__(self, "scores", dict(self.scores))


@dataclass(frozen=True)
class Cohort:
    """Ordered, immutable list of cases.

    The plain constructor performs no cross-case validation; it is used
    internally for bootstrap resamples, where duplicated case ids are
    expected. Use :meth:`from_cases` (or :func:`parse_cohort`) at ingestion
    boundaries to enforce id uniqueness and non-emptiness.
    """

    cases: tuple[CaseRecord, ...]
    role: Role = Role.EVALUATE

    @classmethod
    def from_cases(cls, cases: Sequence[CaseRecord], role: Role = Role.EVALUATE) -> "Cohort":
        cases = tuple(cases)
        if not cases:
            raise EmptyCohort()
        seen: set[str] = set()
        for case in cases:
            if case.case_id in seen:
                raise DuplicateCaseId(case.case_id)
            seen.add(case.case_id)
        return cls(cases=cases, role=role)

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self) -> Iterator[CaseRecord]:
        return iter(self.cases)

    @property
    def case_ids(self) -> tuple[str, ...]:
        return tuple(c.case_id for c in self.cases)

    @property
    def labels(self) -> np.ndarray:
        return np.array([c.label for c in self.cases], dtype=int)

    def score_names(self) -> tuple[str, ...]:
        names: dict[str, None] = {}
        for case in self.cases:
            for name in case.scores:
                names.setdefault(name)
        return tuple(names)

    def score_column(self, name: str) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
        """Aligned (scores, labels, case_ids) over the cases carrying `name`.

        Cases without the score are excluded, so metrics for a model are
        computed over exactly its evaluable subset.
        """
        rows = [(c.scores[name], c.label, c.case_id) for c in self.cases if name in c.scores]
        if not rows:
            raise MissingColumn(name)
        scores, labels, ids = zip(*rows)
        return np.array(scores, dtype=float), np.array(labels, dtype=int), tuple(ids)

    def subset_with_score(self, name: str) -> "Cohort":
        """Sub-cohort of the cases that carry score `name` (order preserved)."""
        cases = tuple(c for c in self.cases if name in c.scores)
        if not cases:
            raise MissingColumn(name)
        return Cohort(cases=cases, role=self.role)

    def with_score(self, name: str, values: Mapping[str, float]) -> "Cohort":
        """New cohort with score `name` attached to the cases listed in `values`."""
        new_cases = []
        for case in self.cases:
            if case.case_id in values:
                scores = dict(case.scores)
                scores[name] = float(values[case.case_id])
                new_cases.append(replace(case, scores=scores))
            else:
                new_cases.append(case)
        return Cohort(cases=tuple(new_cases), role=self.role)


@dataclass(frozen=True)
class ColumnSchema:
    """Maps logical case fields onto CSV column names.

    Score columns keep their file names as model names, so one file can
    carry several models. Blood columns must be mapped all together or not
    at all; a half-mapped panel cannot be validated meaningfully.
    """

    case_id: str = "case_id"
    label: str = "label"
    scores: tuple[str, ...] = ()
    pct_normal: str | None = None
    siri: str | None = None
    neutrophils: str | None = None
    monocytes: str | None = None
    lymphocytes: str | None = None

    def __post_init__(self):
        blood = (self.neutrophils, self.monocytes, self.lymphocytes)
        if any(c is not None for c in blood) and not all(c is not None for c in blood):
            raise InputError(
                "blood panel columns must be mapped together "
                "(neutrophils, monocytes, lymphocytes)"
            )
        object.__setattr__(self, "scores", tuple(self.scores))

    def mapped_columns(self) -> tuple[str, ...]:
        cols = [self.case_id, self.label, *self.scores]
        for c in (self.pct_normal, self.siri, self.neutrophils, self.monocytes, self.lymphocytes):
            if c is not None:
                cols.append(c)
        return tuple(cols)


def _parse_float(cell: str, line: int, column: str, lo: float, hi: float) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise MalformedValue(line, column, cell, "not a number") from None
    if math.isnan(value) or not lo <= value <= hi:
        raise MalformedValue(line, column, cell, f"outside [{lo:g}, {hi:g}]")
    return value


def parse_cohort(path: str | Path, schema: ColumnSchema, role: Role = Role.EVALUATE) -> Cohort:
    """Read and validate a cohort CSV.

    The file must be UTF-8 with a header row naming every mapped column.
    Empty cells in optional columns mean "absent"; empty cells in required
    columns, and any unparseable or out-of-range cell, are hard errors.
    Row order is preserved.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyCohort(f"{path}: file is empty")
        header = set(reader.fieldnames)
        for column in schema.mapped_columns():
            if column not in header:
                raise MissingColumn(column)

        cases: list[CaseRecord] = []
        seen: set[str] = set()
        for row in reader:
            line = reader.line_num
            case_id = (row[schema.case_id] or "").strip()
            if not case_id:
                raise MalformedValue(line, schema.case_id, "", "empty case id")
            if case_id in seen:
                raise DuplicateCaseId(case_id)
            seen.add(case_id)

            label_cell = (row[schema.label] or "").strip()
            if label_cell not in ("0", "1"):
                raise MalformedValue(line, schema.label, label_cell, "label must be 0 or 1")
            label = int(label_cell)

            pct_normal = None
            if schema.pct_normal is not None and (row[schema.pct_normal] or "").strip():
                pct_normal = _parse_float(
                    row[schema.pct_normal].strip(), line, schema.pct_normal, 0.0, 100.0
                )

            siri = None
            if schema.siri is not None and (row[schema.siri] or "").strip():
                siri = _parse_float(row[schema.siri].strip(), line, schema.siri, 0.0, math.inf)

            blood = None
            if schema.neutrophils is not None:
                blood_cells = {
                    col: (row[col] or "").strip()
                    for col in (schema.neutrophils, schema.monocytes, schema.lymphocytes)
                }
                filled = [col for col, cell in blood_cells.items() if cell]
                if len(filled) == 3:
                    neut, mono, lymph = (
                        _parse_float(blood_cells[col], line, col, 0.0, math.inf)
                        for col in (schema.neutrophils, schema.monocytes, schema.lymphocytes)
                    )
                    blood = BloodPanel(neut, mono, lymph)
                elif filled:
                    missing = next(col for col, cell in blood_cells.items() if not cell)
                    raise MalformedValue(
                        line, missing, "", "blood panel is partially filled"
                    )

            scores: dict[str, float] = {}
            for column in schema.scores:
                cell = (row[column] or "").strip()
                if cell:
                    scores[column] = _parse_float(cell, line, column, 0.0, 1.0)

            cases.append(
                CaseRecord(
                    case_id=case_id,
                    label=label,
                    pct_normal=pct_normal,
                    siri=siri,
                    blood=blood,
                    scores=scores,
                )
            )

    if not cases:
        raise EmptyCohort(f"{path}: no data rows")
    return Cohort.from_cases(cases, role=role)


def write_cohort(cohort: Cohort, path: str | Path, schema: ColumnSchema) -> None:
    """Write a cohort back to CSV under `schema` (inverse of parse_cohort).

    Floats are written with repr precision so a parse -> write -> parse
    round trip reproduces the cohort exactly.
    """
    path = Path(path)

    def cell(v: float | None) -> str:
        return "" if v is None else repr(float(v))

    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(schema.mapped_columns())
        for case in cohort.cases:
            row = [case.case_id, str(case.label)]
            row.extend(cell(case.scores.get(name)) for name in schema.scores)
            if schema.pct_normal is not None:
                row.append(cell(case.pct_normal))
            if schema.siri is not None:
                row.append(cell(case.siri))
            if schema.neutrophils is not None:
                b = case.blood
                row.extend(
                    ["", "", ""]
                    if b is None
                    else [cell(b.neutrophils), cell(b.monocytes), cell(b.lymphocytes)]
                )
            writer.writerow(row)


def prevalence(cohort: Cohort) -> float:
    """Fraction of positive-label cases."""
    if len(cohort) == 0:
        raise EmptyCohort()
    return sum(c.label for c in cohort.cases) / len(cohort)


def check_disjoint(a: Cohort, b: Cohort) -> tuple[str, ...]:
    """Case ids shared between two cohorts, sorted. Empty means leakage-free."""
    return tuple(sorted(set(a.case_ids) & set(b.case_ids)))
