import sys

import numpy as np
import pytest

from nlslab.radial import ModelParams, make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cubic():
    return ModelParams(3, 1.0, p1=2.0)


@pytest.fixture
def grid3():
    return make_grid(20.0, 1024, 3)


def rel(a, b):
    """Relative distance of two scalars."""
    den = max(abs(a), abs(b))
    return 0.0 if den == 0 else abs(a - b) / den


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"C{n:<2} {'PASS' if ok else 'FAIL'}  {detail}")
