"""Shared fixtures: expensive waves are computed once per session."""
import math
import time

import pytest

from whitham.solitary import extract_solitary, period_sweep
from whitham.solver import continue_in_lambda, extreme_wave, resolve

SCHEDULE = (32.0, 64.0, 128.0, 256.0)
BRANCH_LAMS = tuple(round(0.1 * k, 10) for k in range(1, 10))

# acceptance outcomes, filled by tests/test_acceptance.py
ACCEPTANCE = {}


class _SolitaryCache:
    def __init__(self):
        self._store = {}
        self.timings = {}

    def sweep(self, lam):
        return self._get(lam)[0]

    def __call__(self, lam):
        return self._get(lam)[1]

    def _get(self, lam):
        if lam not in self._store:
            t = time.perf_counter()
            sw = period_sweep(lam, SCHEDULE)
            self._store[lam] = (sw, extract_solitary(sw))
            self.timings[lam] = time.perf_counter() - t
        return self._store[lam]


@pytest.fixture(scope="session")
def solitary():
    """``solitary(lam)`` gives the wave, ``solitary.sweep(lam)`` the sweep behind it."""
    return _SolitaryCache()


@pytest.fixture(scope="session")
def branch_2pi():
    t = time.perf_counter()
    br = continue_in_lambda(2 * math.pi, BRANCH_LAMS)
    elapsed = time.perf_counter() - t
    return br, elapsed


@pytest.fixture(scope="session")
def resolved_branch_2pi(branch_2pi):
    return [resolve(w) for w in branch_2pi[0]]


@pytest.fixture(scope="session")
def cusp_wave():
    t = time.perf_counter()
    w = extreme_wave()
    return w, time.perf_counter() - t


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
