import numpy as np
import pytest

from timedelay.exceptions import BoxOverflowError, ContractError, SingularSymbolError
from timedelay.grid import (Grid, Representation, WaveFunction, as_position, check_interior,
                            gaussian, hermite_function, inner, mixed_expectation,
                            momentum_density, position_density, to_momentum, to_position)


def test_grid_rejects_bad_sizes():
    with pytest.raises(ContractError):
        Grid(1000, -1.0, 1.0)
    with pytest.raises(ContractError):
        Grid(1024, 1.0, 1.0)


def test_grid_geometry():
    g = Grid(256, -4.0, 4.0)
    assert g.dx == pytest.approx(8.0 / 256)
    assert g.dk == pytest.approx(2 * np.pi / 8.0)
    assert g.x[0] == -4.0 and g.x.size == 256
    assert g.k[128] == 0.0
    assert g.k_max == pytest.approx(np.pi / g.dx)


def test_samples_are_read_only(small_grid):
    phi = gaussian(small_grid)
    with pytest.raises(ValueError):
        phi.samples[0] = 1.0


def test_representation_contract(small_grid):
    pk = to_momentum(gaussian(small_grid))
    with pytest.raises(ContractError):
        to_momentum(pk)
    with pytest.raises(ContractError):
        pk + gaussian(small_grid)


def test_round_trip_and_parseval(small_grid, rng):
    a = rng.normal(size=small_grid.n_points) + 1j * rng.normal(size=small_grid.n_points)
    phi = WaveFunction(small_grid, a)
    pk = to_momentum(phi)
    assert np.max(np.abs(to_position(pk).samples - a)) < 1e-12
    assert pk.norm() == pytest.approx(phi.norm(), rel=1e-13)


def test_gaussian_transform_matches_closed_form(small_grid):
    x0, w, k0 = 1.3, 0.8, 0.7
    pk = to_momentum(gaussian(small_grid, x0, w, k0))
    k = small_grid.k
    exact = (w * w / np.pi) ** 0.25 * np.exp(-((k - k0) * w) ** 2 / 2 - 1j * (k - k0) * x0)
    assert np.max(np.abs(pk.samples - exact)) < 1e-12


def test_gaussian_is_normalized(small_grid):
    assert gaussian(small_grid, 2.0, 1.5, -1.0).norm() == pytest.approx(1.0, abs=1e-13)


def test_hermite_functions_orthonormal(small_grid):
    hs = [hermite_function(small_grid, n) for n in range(6)]
    G = np.array([[inner(a, b) for b in hs] for a in hs])
    assert np.max(np.abs(G - np.eye(6))) < 1e-12


def test_mixed_expectation_commutator(small_grid):
    phi = gaussian(small_grid, 0.0, 1.0, 0.0)
    qp = mixed_expectation(phi, lambda p: p, apply_Q_after=True)
    pq = mixed_expectation(phi, lambda p: p, apply_Q_after=False)
    assert qp == pytest.approx(0.5j, abs=1e-12)
    assert qp - pq == pytest.approx(1j, abs=1e-12)


def test_mixed_expectation_singular_symbol(small_grid):
    phi = gaussian(small_grid, 0.0, 1.0, 0.0)
    with pytest.raises(SingularSymbolError):
        mixed_expectation(phi, lambda p: 1.0 / p)


def test_check_interior(small_grid):
    assert check_interior(gaussian(small_grid)) < 1e-10
    with pytest.raises(BoxOverflowError):
        check_interior(gaussian(small_grid, 18.0, 1.0))


def test_densities_integrate_to_norm(small_grid):
    phi = gaussian(small_grid, 0.5, 1.2, 0.3)
    for dens in (position_density, momentum_density):
        _, d, h = dens(phi, pad=2)
        assert d.sum() * h == pytest.approx(1.0, rel=1e-12)
    _, d, h = momentum_density(phi, pad=1)
    assert np.allclose(d, np.abs(to_momentum(phi).samples) ** 2, atol=1e-15)


def test_position_density_interpolates(small_grid):
    phi = gaussian(small_grid, 0.0, 1.0, 0.0)
    x, d, _ = position_density(phi, pad=4)
    assert np.max(np.abs(d - np.exp(-x**2) / np.sqrt(np.pi))) < 1e-12


def test_as_position_is_identity_on_position(small_grid):
    phi = gaussian(small_grid)
    assert as_position(phi) is phi
    assert to_momentum(phi).representation is Representation.MOMENTUM
