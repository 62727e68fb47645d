import numpy as np
import pytest

from clrsc.numerics import RngStream


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def stream():
    return RngStream(7, (99,))


_VERDICTS = {}


@pytest.fixture(scope="session")
def verdict():
    """Record a pass/fail line for an acceptance criterion; returns ``ok``."""
    def record(number, title, ok, detail=""):
        _VERDICTS[number] = (title, bool(ok), detail)
        print(f"criterion {number} [{title}]: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        title, ok, detail = _VERDICTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number}. {title}  {detail}")
