import functools

import numpy as np
import pytest

from framelet.generators import construct_phi, construct_psi
from framelet.grid import FrequencyGrid

MATRICES = {
    "2": 2.0,
    "2I2": "2,0;0,2",
    "quincunx": "1,1;1,-1",
    "jordan": "2,1;0,2",
}


@functools.lru_cache(maxsize=None)
def pair(name: str, lambda0: float = 0.8):
    phi = construct_phi(MATRICES[name], lambda0)
    return phi, construct_psi(phi)


@functools.lru_cache(maxsize=None)
def cube(n: int, dim: int) -> FrequencyGrid:
    return FrequencyGrid.cube(n, dim)


@pytest.fixture(params=list(MATRICES))
def matrix_name(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(0x5EED)


ACCEPTANCE_LINES: list = []


def record(number: int, ok: bool, detail: str) -> None:
    """Print and remember one acceptance line."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
