import numpy as np
import pytest

from timedelay.dispersion import (EnergyWindow, admissible, builtin, check_derivatives,
                                  from_table, gaussian_window_mass, linear, project_to_window)
from timedelay.exceptions import ContractError
from timedelay.grid import Grid, gaussian


@pytest.fixture(scope="module")
def grid():
    return Grid.centered(4096, 100.0)


def test_builtins_and_critical_values():
    assert builtin("schroedinger").critical_values == (0.0,)
    assert builtin("sqrt_klein_gordon").critical_values == (1.0,)
    h = builtin("linear(2, -3)")
    assert h.h(np.array([1.0])) == pytest.approx([-1.0])
    assert h.critical_values == ()
    with pytest.raises(ContractError):
        builtin("nonsense")
    with pytest.raises(ContractError):
        linear(0.0, 0.0)


@pytest.mark.parametrize("name", ["schroedinger", "sqrt_klein_gordon", "linear"])
def test_derivatives_consistent(name):
    assert check_derivatives(builtin(name), (-3.0, 3.0)) < 1e-7


def test_window_validation():
    h = builtin("schroedinger")
    EnergyWindow(1.0, 16.0).validate(h)
    with pytest.raises(ContractError):
        EnergyWindow(0.0005, 1.0).validate(h)
    with pytest.raises(ContractError):
        EnergyWindow(-1.0, 1.0).validate(h)
    with pytest.raises(ContractError):
        EnergyWindow(2.0, 1.0)


def test_admissibility_matches_erfc_oracle(grid):
    h = builtin("schroedinger")
    win = EnergyWindow(1.0, 16.0)
    # momentum sd 1/(w sqrt 2): w = 4 keeps the mass outside p in [1, 4] near 1e-17
    good = gaussian(grid, 0.0, 4.0, 2.5)
    assert gaussian_window_mass(2.5, 1 / (4 * np.sqrt(2)), 1.0, 4.0) < 1e-15
    assert admissible(good, h, win)
    wide = gaussian(grid, 0.0, 0.3, 2.0)
    assert gaussian_window_mass(2.0, 1 / (0.3 * np.sqrt(2)), 1.0, 4.0) > 1e-2
    assert not admissible(wide, h, win)


def test_project_to_window(grid):
    h = builtin("schroedinger")
    win = EnergyWindow(1.0, 16.0)
    phi = project_to_window(gaussian(grid, 0.0, 0.3, 2.0), h, win)
    assert admissible(phi, h, win, mass_tol=1e-28, pad=1)


def test_table_symbol_recovers_schroedinger():
    p = np.linspace(-5, 5, 2001)
    h = from_table(p, p**2)
    assert len(h.critical_points) == 1
    assert h.critical_points[0] == pytest.approx(0.0, abs=1e-8)
    assert h.margin_factor == 10.0
    assert check_derivatives(h, (-4.0, 4.0)) < 1e-4
