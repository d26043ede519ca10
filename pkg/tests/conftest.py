import numpy as np
import pytest

from spdc_schmidt import modes

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def basis13():
    return modes.HGBasis.from_widths(1.0, 3.0)


@pytest.fixture(scope="session")
def grid13(basis13):
    return basis13.default_grid()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
