import numpy as np
import pytest

from hartree6 import assemble_mode_operator, build_grid, solve_spectrum

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def grid():
    return build_grid(256)


@pytest.fixture(scope="session")
def grid64():
    return build_grid(64)


@pytest.fixture(scope="session")
def ops(grid):
    cache = {}

    def get(k):
        if k not in cache:
            cache[k] = assemble_mode_operator(k, grid)
        return cache[k]

    return get


@pytest.fixture(scope="session")
def spectra(ops):
    cache = {}

    def get(k):
        if k not in cache:
            cache[k] = solve_spectrum(ops(k), 6)
        return cache[k]

    return get


@pytest.fixture
def rng(request):
    # stable per-test stream derived from the test name
    seed = sum(ord(c) for c in request.node.name)
    return np.random.default_rng(seed)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
