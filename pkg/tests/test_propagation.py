import numpy as np
import pytest

from conftest import s_lorentz
from timedelay.dispersion import builtin
from timedelay.exceptions import BoxOverflowError, ContractError
from timedelay.grid import Grid, as_momentum, gaussian
from timedelay.model import FriedrichsModel, lorentzian
from timedelay.propagation import (FriedrichsPropagator, cook_decay, fit_power_law,
                                   free_evolve, free_evolve_friedrichs, friedrichs_evolve,
                                   scatter, scatter_with_tails, wave_operator)


@pytest.fixture(scope="module")
def grid():
    return Grid.centered(4096, 100.0)


def _moments(phi):
    d = np.abs(phi.samples) ** 2 * phi.grid.dx
    x = phi.grid.x
    m = np.sum(x * d)
    return m, np.sum((x - m) ** 2 * d)


def test_schroedinger_spreading(grid):
    w, k0, t = 1.0, 1.5, 3.0
    phi = free_evolve(gaussian(grid, 0.0, w, k0), builtin("schroedinger"), t)
    mean, var = _moments(phi)
    assert mean == pytest.approx(2 * k0 * t, abs=1e-10)
    assert var == pytest.approx((w**2 + 4 * t**2 / w**2) / 2, rel=1e-10)


def test_free_evolution_overflow(grid):
    with pytest.raises(BoxOverflowError):
        free_evolve(gaussian(grid, 0.0, 1.0, 3.0), builtin("schroedinger"), 20.0)


def test_friedrichs_free_flight_shifts_momentum(grid):
    phi = gaussian(grid, 0.0, 1.0, 0.5)
    pk = as_momentum(free_evolve_friedrichs(phi, 4.0))
    mean = np.sum(pk.grid.k * np.abs(pk.samples) ** 2) * pk.grid.dk
    assert mean == pytest.approx(0.5 - 4.0, abs=1e-10)


def test_trivial_model_is_free(grid):
    phi = gaussian(grid)
    m = FriedrichsModel.from_profiles([lorentzian(0)], [0.0])
    a = friedrichs_evolve(phi, m, 2.0, 0.1)
    assert np.max(np.abs(a.samples - free_evolve_friedrichs(phi, 2.0).samples)) < 1e-13


def test_norm_and_reversibility(grid, lorentz_model):
    phi = gaussian(grid, 1.0, 1.0, 0.0)
    out = friedrichs_evolve(phi, lorentz_model, 5.0, 0.01)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    back = friedrichs_evolve(out, lorentz_model, -5.0, 0.01)
    assert np.max(np.abs(back.samples - phi.samples)) < 1e-11


def test_kick_is_unitary(grid, lorentz_model):
    prop = FriedrichsPropagator(lorentz_model, grid, 0.3)
    rng = np.random.default_rng(0)
    a = rng.normal(size=grid.n_points) + 1j * rng.normal(size=grid.n_points)
    assert np.linalg.norm(prop.kick(a)) == pytest.approx(np.linalg.norm(a), rel=1e-13)


def test_strang_second_order(grid, lorentz_model):
    phi = gaussian(grid)
    ref = friedrichs_evolve(phi, lorentz_model, 4.0, 0.0025).samples
    errs = [np.max(np.abs(friedrichs_evolve(phi, lorentz_model, 4.0, dt).samples - ref))
            for dt in (0.04, 0.02)]
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_step_must_divide_time(grid, lorentz_model):
    with pytest.raises(ContractError):
        friedrichs_evolve(gaussian(grid), lorentz_model, 1.0, 0.3)
    with pytest.raises(ContractError):
        wave_operator(gaussian(grid), lorentz_model, "sideways", 1.0, 0.1)


def test_fit_power_law_exact():
    t = np.geomspace(1, 10, 20)
    fit = fit_power_law(t, 3.0 * t**-2.5)
    assert fit.exponent == pytest.approx(2.5)
    assert fit.prefactor == pytest.approx(3.0)
    assert fit.r_squared == pytest.approx(1.0)


def test_cook_integrand_decays(grid, lorentz_model):
    # the Lorentzian transform is one-sided: Gaussian decay for tau > 0, exponential for tau < 0
    for taus in (np.array([0.5, 1.0, 2.0, 5.0]), -np.array([1.0, 5.0, 10.0, 20.0])):
        c = cook_decay(gaussian(grid), lorentz_model, taus)
        assert np.all(np.diff(c) < 0)


def test_scatter_matches_s_matrix(lorentz_model):
    g = Grid.centered(8192, 100.0)
    phi = gaussian(g)
    res = scatter_with_tails(phi, lorentz_model, 20.0, 0.01)
    assert res.converged
    sel = np.abs(phi.samples) >= 0.05 * np.abs(phi.samples).max()
    ratio = res.state.samples[sel] / phi.samples[sel]
    assert np.max(np.abs(ratio - s_lorentz(g.x[sel]))) < 1e-3
    assert scatter(phi, lorentz_model, 20.0, 0.01).norm() == pytest.approx(1.0, abs=1e-12)


def test_wave_operator_tail(grid, lorentz_model):
    res = wave_operator(gaussian(grid), lorentz_model, "minus", 20.0, 0.02)
    assert res.converged and res.tail_estimate < 1e-5
    assert res.decay_fit.exponent >= 2
