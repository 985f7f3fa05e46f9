import numpy as np
import pytest

from ccmorph import Rng


@pytest.fixture
def rng():
    return Rng(12345)


def central_diff(f, z, h=1e-6):
    z = np.asarray(z, dtype=float)
    g = np.zeros_like(z)
    for i in range(z.size):
        e = np.zeros_like(z)
        e[i] = h
        g[i] = (f(z + e) - f(z - e)) / (2 * h)
    return g


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.LINES:
            terminalreporter.write_line(line)
