import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from multicz.lattice import CubeFamily, Grid

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow,
                                                 HealthCheck.large_base_example])
settings.load_profile("default")


@pytest.fixture
def grid():
    return Grid(0.0, 4.0, 256)


@pytest.fixture
def family(grid):
    return CubeFamily(grid, "shifted_dyadic")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    def check(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        request.config.stash[ACCEPTANCE].append(line)
        assert ok, line
    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
