import numpy as np
import pytest

from mixsde import GridPath

# smooth closed forms at n = 2048
QUAD_TOL = 1e-3
# path-level oracles (refinement, Young sums)
PATH_TOL = 0.01


def line(n=2048, T=1.0, func=lambda t: t):
    return GridPath.from_function(func, n, T)


@pytest.fixture
def grid_s():
    return line()


@pytest.fixture
def grid_ones():
    return line(func=np.ones_like)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for key in sorted(REPORT):
            terminalreporter.write_line(REPORT[key])
