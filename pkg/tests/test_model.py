import numpy as np
import pytest
from scipy import integrate

from timedelay.exceptions import ContractError
from timedelay.grid import Grid
from timedelay.model import (FriedrichsModel, custom_profile, hermite, hermite_combination,
                             hermite_resolvent, lorentzian, lorentzian_resolvent,
                             shifted_zero_profile)


def _resolvent_quad(p, q, z):
    f = lambda y: np.conj(p.v(np.array(y))) * q.v(np.array(y)) / (y - z)
    kw = dict(epsabs=1e-13, epsrel=1e-12, limit=500)
    re = integrate.quad(lambda y: float(np.real(f(y))), -np.inf, np.inf, **kw)[0]
    im = integrate.quad(lambda y: float(np.imag(f(y))), -np.inf, np.inf, **kw)[0]
    return re + 1j * im


def test_lorentzian_family_orthonormal():
    m = FriedrichsModel.from_profiles([lorentzian(n) for n in range(3)], [1.0, 1.0, 1.0])
    assert m.check_orthonormal(tol=1e-10) < 1e-10


def test_lorentzian_modulus():
    y = np.linspace(-5, 5, 11)
    for n in range(4):
        assert np.allclose(np.abs(lorentzian(n).v(y)) ** 2, 1 / (np.pi * (1 + y**2)))


@pytest.mark.parametrize("prof", [lorentzian(0), lorentzian(2), hermite(0), hermite(3),
                                  hermite_combination([0.3, -1.0, 0.5])])
def test_profile_derivatives(prof):
    y = np.linspace(-3, 3, 13)
    h = 1e-5
    fd1 = (prof.v(y + h) - prof.v(y - h)) / (2 * h)
    fd2 = (prof.v_prime(y + h) - prof.v_prime(y - h)) / (2 * h)
    assert np.max(np.abs(fd1 - prof.v_prime(y))) < 1e-8
    assert np.max(np.abs(fd2 - prof.derivative(2, y))) < 1e-8
    with pytest.raises(ContractError):
        prof.derivative(5, y)


@pytest.mark.parametrize("z", [0.3 + 0.5j, -2.0 + 0.1j])
def test_lorentzian_resolvent_closed_form(z):
    for j, k in [(0, 0), (0, 1), (0, 2), (1, 0)]:
        ref = _resolvent_quad(lorentzian(j), lorentzian(k), z)
        assert abs(lorentzian_resolvent(j, k, z) - ref) < 1e-9


def test_hermite_resolvent_closed_form():
    z = 0.7 + 0.4j
    assert abs(hermite_resolvent(z) - _resolvent_quad(hermite(0), hermite(0), z)) < 1e-10


def test_shifted_zero_profile():
    p = shifted_zero_profile(-1.0)
    assert abs(p.v(np.array(-1.0))) < 1e-15
    m = FriedrichsModel.from_profiles([p], [-1.5])
    assert m.check_orthonormal() < 1e-10


def test_shift():
    p = lorentzian(1)
    y = np.linspace(-2, 2, 9)
    assert np.allclose(p.shifted(0.7).v(y + 0.7), p.v(y), atol=1e-15)


def test_model_basics():
    m = FriedrichsModel.from_profiles([lorentzian(0), lorentzian(1)], [1.0, -0.5])
    assert m.rank == 2 and not m.is_trivial
    assert m.values(np.zeros(5)).shape == (2, 5)
    assert FriedrichsModel.from_profiles([lorentzian(0)], [0.0]).is_trivial
    assert FriedrichsModel().values(np.zeros(3)).shape == (0, 3)
    with pytest.raises(ContractError):
        FriedrichsModel.from_profiles([lorentzian(0)], [1.0, 2.0])


def test_grid_gram_with_exterior():
    g = Grid.centered(4096, 50.0)
    m = FriedrichsModel.from_profiles([lorentzian(0), lorentzian(1)], [1.0, 1.0])
    assert m.check_orthonormal(g, tol=1e-8) < 1e-8
    # without the exterior correction the slow Lorentzian tail is missing
    G = m.gram(g, exterior=False)
    assert abs(G[0, 0] - 1.0) > 1e-3


def test_non_orthonormal_rejected():
    m = FriedrichsModel.from_profiles([hermite(0), hermite_combination([1.0, 0.1])], [1.0, 1.0])
    with pytest.raises(ContractError):
        m.check_orthonormal()


def test_custom_profile_declared_order():
    p = custom_profile(lambda y: np.exp(-np.abs(y)), lambda y: -np.sign(y) * np.exp(-np.abs(y)), 1.5)
    assert p.sobolev_order == 1.5
    assert FriedrichsModel.from_profiles([p], [1.0]).sobolev_order == 1.5
