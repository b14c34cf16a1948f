import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timedelay.exceptions import ContractError
from timedelay.localization import (F_f, R_f, R_f_grad, R_f_trapezoid, make_anisotropic_bump,
                                    make_characteristic, make_plateau_bump, make_plateau_power,
                                    smoothstep)

TOL = 1e-7
pos = st.floats(0.2, 3.0)
scale = st.floats(0.1, 10.0)


def _point(dim, norm, angle):
    u = np.array([np.cos(angle + k) for k in range(dim)])
    return norm * u / np.linalg.norm(u)


def test_smoothstep_shape():
    t = np.linspace(-1, 2, 301)
    s = smoothstep(t)
    assert s[0] == 0.0 and s[-1] == 1.0
    assert np.all(np.diff(s) >= 0)
    assert smoothstep(0.5) == pytest.approx(0.5)


@settings(max_examples=40, deadline=None)
@given(dim=st.integers(1, 3), a=pos, d=pos, n=scale, t=scale, angle=st.floats(0, 6.3))
def test_radial_bump_identities(dim, a, d, n, t, angle):
    f = make_plateau_bump(dim, a, d)
    x = _point(dim, n, angle)
    g = R_f_grad(f, x)
    assert abs(x @ g + 1.0) < TOL
    assert np.max(np.abs(g + x / (x @ x))) < TOL
    assert abs(R_f(f, t * x) - R_f(f, x) + np.log(t)) < TOL
    assert abs(t * F_f(f, t * x) - F_f(f, x)) < TOL


@settings(max_examples=25, deadline=None)
@given(dim=st.integers(1, 3), a=pos, d=pos, n=scale, t=scale, angle=st.floats(0, 6.3),
       axes=st.lists(st.floats(0.5, 2.0), min_size=3, max_size=3))
def test_anisotropic_bump_identities(dim, a, d, n, t, angle, axes):
    f = make_anisotropic_bump(dim, a, d, axes[:dim])
    x = _point(dim, n, angle)
    assert abs(x @ R_f_grad(f, x) + 1.0) < TOL
    assert abs(R_f(f, t * x) - R_f(f, x) + np.log(t)) < TOL
    assert abs(t * F_f(f, t * x) - F_f(f, x)) < TOL


@settings(max_examples=25, deadline=None)
@given(a=pos, rho=st.floats(1.2, 5.0))
def test_plateau_power_closed_forms(a, rho):
    f = make_plateau_power(1, a, rho)
    # R_f(1) = ln a + 1/rho and F_f(1) = 2a rho / (rho - 1)
    assert R_f(f, 1.0) == pytest.approx(np.log(a) + 1.0 / rho, abs=TOL)
    assert F_f(f, 1.0) == pytest.approx(2 * a * rho / (rho - 1), abs=10 * TOL)


@settings(max_examples=25, deadline=None)
@given(delta=st.floats(0.1, 5.0), x=st.floats(-10, 10).filter(lambda v: abs(v) > 0.01))
def test_characteristic_closed_forms(delta, x):
    f = make_characteristic([-delta, delta])
    assert R_f(f, x) == pytest.approx(np.log(delta / abs(x)), abs=TOL)
    assert F_f(f, x) == pytest.approx(2 * delta / abs(x), rel=1e-12)


def test_characteristic_fourier():
    f = make_characteristic([[-2.0, -1.0], [-0.5, 0.5], [1.0, 2.0]])
    s = np.array([0.0, 0.3, 2.0])
    u = np.linspace(-2, 2, 400001)
    vals = f(u)
    num = np.array([np.trapezoid(vals * np.exp(-1j * u * si), u) for si in s])
    assert np.max(np.abs(f.fourier(s) - num)) < 1e-4
    assert f.fourier(0.0) == pytest.approx(3.0)


def test_characteristic_contract():
    with pytest.raises(ContractError):
        make_characteristic([-1.0, 2.0])
    with pytest.raises(ContractError):
        make_characteristic([[-2.0, -1.0], [1.0, 2.0]])


def test_non_integrable_decay_rejected():
    with pytest.raises(ContractError):
        F_f(make_plateau_power(1, 1.0, 0.8), 1.0)


@pytest.mark.parametrize("dim,x", [(1, [0.7]), (2, [0.3, -1.1]), (3, [2.0, 0.5, -0.4])])
def test_trapezoid_oracle(dim, x):
    f = make_plateau_bump(dim, 0.8, 1.3)
    assert abs(R_f(f, x) - R_f_trapezoid(f, x)) < 1e-9


def test_gaussian_profile_integral():
    from timedelay.localization import make_radial
    f = make_radial(1, lambda r: np.exp(-r**2), lambda r: -2 * r * np.exp(-r**2),
                    rho=4.0, decay_constant=1.5)
    assert F_f(f, 2.0) == pytest.approx(np.sqrt(np.pi) / 2, abs=1e-8)
