import numpy as np
import pytest

from slitbilliard import make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_grid():
    # 24 x 24 nodes, centred
    return make_grid(0.48, 0.48, 0.02)


def random_field(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


# acceptance criteria register one line each; printed in the terminal summary
_CRITERIA = {}


@pytest.fixture(scope="session")
def criterion():
    def record(number, passed, detail):
        _CRITERIA[number] = (bool(passed), detail)
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
