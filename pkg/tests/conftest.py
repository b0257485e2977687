"""Shared fixtures and the acceptance summary printed after the run."""
import numpy as np
import pytest

from vekuabvp.diskgrid import make_grid

ACCEPTANCE_LINES = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    """Store and print one pass/fail line for an acceptance criterion."""
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(48, 96, 0.95, 0.5)


@pytest.fixture(scope="session")
def medium_grid():
    return make_grid(96, 192, 0.95, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def smooth_bump(center=0.1 + 0.0j, radius=0.4):
    """``(1 - |z - c|^2 / r^2)_+^4``, a C^3 bump with closed-form derivatives."""
    def f(z):
        z = np.asarray(z, dtype=complex)
        return np.clip(1.0 - np.abs(z - center) ** 2 / radius**2, 0.0, None) ** 4
    return f

