from __future__ import annotations

import pytest

from critchain import fisher

# Lines recorded by the acceptance tests, echoed at the end of the session.
ACCEPTANCE_LINES: dict[int, str] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)


@pytest.fixture(scope="session", autouse=True)
def _arbitrated():
    """Arbitrate the QFI convention once for the whole session."""
    return fisher.arbitrate_convention()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
