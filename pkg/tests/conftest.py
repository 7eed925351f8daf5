import numpy as np
import pytest

# one line per acceptance criterion, filled by tests/test_acceptance.py
CRITERIA = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA, key=lambda k: str(k).rjust(3)):
        ok, detail = CRITERIA[key]
        terminalreporter.write_line(f"criterion {str(key):>2}: {'PASS' if ok else 'FAIL'}  {detail}")
