import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("gaussbound", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("gaussbound")

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, passed: bool, detail: str = "") -> bool:
    """Queue a PASS/FAIL line for the acceptance summary and echo it."""
    line = f"{'PASS' if passed else 'FAIL'} criterion {criterion}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
