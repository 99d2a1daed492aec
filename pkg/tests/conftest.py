import time

import numpy as np
import pytest

from epigrowth import load_preset

# acceptance results collected by test_acceptance.py and echoed at the end of the run
ACCEPTANCE = {}
SUITE_BUDGET = 120.0  # seconds for the whole suite
_START = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_sessionstart(session):
    _START["t"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - _START.get("t", time.perf_counter())
    if 11 in ACCEPTANCE:
        ok, detail = ACCEPTANCE[11]
        in_budget = elapsed < SUITE_BUDGET
        ACCEPTANCE[11] = (ok and in_budget, f"{detail}; suite wall time {elapsed:.1f} s "
                                            f"({'<' if in_budget else '>='} {SUITE_BUDGET:.0f} s)")
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def section6():
    return load_preset("section6")[0]


@pytest.fixture(scope="session")
def section6_extras():
    return load_preset("section6")[1]


@pytest.fixture(scope="session")
def learning():
    return load_preset("learning")[0]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
