import numpy as np
import pytest

CRITERIA = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for the end-of-session summary."""

    def record(number, ok, detail):
        CRITERIA.append(f"[criterion {number}] {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
