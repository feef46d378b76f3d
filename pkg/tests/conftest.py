from __future__ import annotations

import pytest

from diageval.cohort import CaseRecord, Cohort

# populated by tests/test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        status, description = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}: {description}")


def make_cohort(scores, labels, name="score") -> Cohort:
    cases = [
        CaseRecord(f"c{i}", int(y), scores={name: float(s)})
        for i, (s, y) in enumerate(zip(scores, labels))
    ]
    return Cohort.from_cases(cases)


@pytest.fixture
def small_mixed_cohort() -> Cohort:
    return make_cohort([0.9, 0.4, 0.5, 0.1], [1, 1, 0, 0])
