import numpy as np
import pytest

from rsgp import geometry


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_point():
    """x1 = 0, x2 = 1 on the real line."""
    return geometry.from_points([[0.0], [1.0]])


@pytest.fixture
def line5():
    return geometry.build_grid([[0.0, 1.0]], 5)


def random_grid(rng, n=30, dim=2):
    return geometry.from_points(rng.uniform(0, 1, size=(n, dim)))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
