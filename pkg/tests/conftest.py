import time

import numpy as np
import pytest

from planar_sps.grid import build_grid, gaussian_field, normalize_mass
from planar_sps.groundstate import MinimizeConfig, minimize
from planar_sps.logkernel import build_kernel
from planar_sps.nonlinearity import NonlinearitySpec

# one line per acceptance criterion, printed in the terminal summary
CRITERIA_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA_LINES):
        terminalreporter.write_line(CRITERIA_LINES[key])


@pytest.fixture(scope="session")
def report_criterion():
    def report(number, passed, text):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {text}"
        CRITERIA_LINES[number] = line
        print(line)

    return report


@pytest.fixture(scope="session")
def exp_b5():
    return NonlinearitySpec("exp_b", 5.0, theta=1.0)


@pytest.fixture(scope="session")
def small_grid():
    return build_grid(12.0, 64)


@pytest.fixture(scope="session")
def grid256():
    return build_grid(12.0, 256)


@pytest.fixture(scope="session")
def kernel64(small_grid):
    return build_kernel(small_grid)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def gauss64(small_grid):
    return normalize_mass(gaussian_field(small_grid, width=1.3, center=(0.4, -0.2)), 0.3)


@pytest.fixture(scope="session")
def ground_config(exp_b5):
    return MinimizeConfig(c=0.05, rho=0.5, spec=exp_b5, L=64.0, n=256)


@pytest.fixture(scope="session")
def timed_ground_state(ground_config):
    """The c = 0.05 ground state shared by the slower tests, with its runtime."""
    start = time.perf_counter()
    res = minimize(ground_config)
    return res, time.perf_counter() - start


@pytest.fixture(scope="session")
def ground_state(timed_ground_state):
    return timed_ground_state[0]
