import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


#: ``(criterion, passed, detail)`` lines collected by the acceptance suite.
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
