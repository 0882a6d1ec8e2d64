import time

import mpmath
import pytest

from pellnarayana.pipeline import RunConfig, verify_theorem

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(autouse=True)
def restore_mpmath_precision():
    saved = mpmath.mp.dps
    yield
    mpmath.mp.dps = saved


@pytest.fixture(scope="session")
def full_run():
    """One complete default replay, shared by every test that needs it."""
    start = time.perf_counter()
    cert = verify_theorem(RunConfig())
    return cert, time.perf_counter() - start


@pytest.fixture
def report():
    def record(criterion: str, ok: bool, detail: str = "") -> None:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}" + (f"  ({detail})" if detail else ""))

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
