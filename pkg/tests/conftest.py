import numpy as np
import pytest

from timedelay.grid import Grid, gaussian
from timedelay.model import FriedrichsModel, lorentzian


@pytest.fixture(scope="session")
def wide_grid():
    return Grid.centered(16384, 200.0)


@pytest.fixture(scope="session")
def small_grid():
    return Grid.centered(1024, 20.0)


@pytest.fixture(scope="session")
def lorentz_model():
    return FriedrichsModel.from_profiles([lorentzian(0)], [1.0])


@pytest.fixture(scope="session")
def packet(wide_grid):
    return gaussian(wide_grid, 0.0, 1.0, 0.0)


def ew_kernel_lorentz(x, lam=1.0):
    return 2.0 / (1.0 + (x - lam) ** 2) - 2.0 / (1.0 + x**2)


def s_lorentz(x, lam=1.0):
    return (x - lam - 1j) * (x + 1j) / ((x - 1j) * (x - lam + 1j))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
