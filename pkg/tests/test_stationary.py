import numpy as np
import pytest

from conftest import ew_kernel_lorentz, s_lorentz
from timedelay.exceptions import ContractError, NearEigenvalueError
from timedelay.grid import Grid, gaussian
from timedelay.model import (FriedrichsModel, hermite, hermite_resolvent, lorentzian,
                             lorentzian_resolvent, shifted_zero_profile)
from timedelay.stationary import (boundary_matrix, derivative_prediction, detect_eigenvalues,
                                  ew_kernel, ew_time_delay, holder_prediction, s_matrix,
                                  s_matrix_determinant, s_matrix_product, s_matrix_rank_one,
                                  restriction_derivative_remainder, restriction_holder_norm,
                                  restriction_regularity_test, apply_s_matrix)

X = np.linspace(-10, 10, 101)


def test_boundary_matrix_lorentzian_family():
    m = FriedrichsModel.from_profiles([lorentzian(n) for n in range(3)], [1.0] * 3)
    B = boundary_matrix(m, X).B_plus
    for j in range(3):
        for k in range(3):
            assert np.max(np.abs(B[:, j, k] - lorentzian_resolvent(j, k, X + 0j))) < 1e-10


def test_boundary_matrix_hermite():
    m = FriedrichsModel.from_profiles([hermite(0)], [1.0])
    B = boundary_matrix(m, X).B_plus[:, 0, 0]
    assert np.max(np.abs(B - hermite_resolvent(X + 0j))) < 1e-10


def test_s_matrix_rank_one_closed_form(lorentz_model):
    S = s_matrix(lorentz_model, X)
    assert np.max(np.abs(S - s_lorentz(X))) < 1e-10
    assert s_matrix(lorentz_model, np.array([0.0]))[0] == pytest.approx(-1j, abs=1e-12)
    assert np.max(np.abs(np.abs(S) - 1)) < 1e-12


@pytest.mark.parametrize("lam", [-2.0, 0.3, 4.0])
def test_rank_one_routes_agree(lam):
    m = FriedrichsModel.from_profiles([lorentzian(0)], [lam])
    S = s_matrix(m, X)
    assert np.max(np.abs(s_matrix_rank_one(m, X) - S)) < 1e-10
    assert np.max(np.abs(s_matrix_determinant(m, X) - S)) < 1e-10
    assert np.max(np.abs(S - s_lorentz(X, lam))) < 1e-10


@pytest.mark.parametrize("profiles", [[lorentzian(0), lorentzian(1)],
                                      [hermite(0), hermite(1)],
                                      [lorentzian(0), lorentzian(1), lorentzian(2)]])
def test_product_formula(profiles):
    m = FriedrichsModel.from_profiles(profiles, [1.0, -0.7, 2.0][:len(profiles)])
    assert np.max(np.abs(s_matrix_product(m, X) - s_matrix(m, X))) < 1e-6


def test_trivial_model():
    m = FriedrichsModel.from_profiles([lorentzian(0)], [0.0])
    assert np.allclose(s_matrix(m, X), 1.0)
    assert np.all(ew_kernel(m, X).ew_kernel == 0.0)


def test_ew_kernel_closed_form(lorentz_model):
    tr = ew_kernel(lorentz_model, X)
    assert tr.converged
    assert np.max(np.abs(tr.ew_kernel - ew_kernel_lorentz(X))) < 1e-8
    assert tr.imag_residue < 1e-8


def test_ew_time_delay_oracle(lorentz_model, packet):
    # scipy quad of |phi|^2 times the closed-form kernel
    assert ew_time_delay(lorentz_model, packet) == pytest.approx(-0.4354542319851127, abs=1e-9)


def test_embedded_eigenvalue():
    m = FriedrichsModel.from_profiles([shifted_zero_profile(-1.0)], [-1.5])
    eig = detect_eigenvalues(m, (-3.0, 3.0))
    assert len(eig) == 1 and eig[0] == pytest.approx(-1.0, abs=1e-6)
    with pytest.raises(NearEigenvalueError):
        s_matrix(m, np.array([-1.0]))
    tr = ew_kernel(m, np.linspace(-3, 3, 61), eigenvalues=eig)
    assert np.all(np.abs(tr.x_grid + 1.0) > 0.05)
    assert detect_eigenvalues(FriedrichsModel.from_profiles([lorentzian(0)], [1.0]), (-5, 5)) == []


def test_apply_s_matrix(lorentz_model):
    g = Grid.centered(1024, 20.0)
    phi = gaussian(g, 0.0, 1.0, 0.0)
    out = apply_s_matrix(lorentz_model, phi)
    sel = np.abs(phi.samples) > 1e-6
    assert np.max(np.abs(out.samples[sel] / phi.samples[sel] - s_lorentz(g.x[sel]))) < 1e-10


def test_predictions():
    assert holder_prediction(1.0) == 0.5 and holder_prediction(3.0) == 1.0
    assert derivative_prediction(2.0) == 0.5 and derivative_prediction(4.0) == 1.0
    with pytest.raises(ContractError):
        holder_prediction(0.5)
    with pytest.raises(ContractError):
        derivative_prediction(1.5)


def test_restriction_closed_forms_against_quadrature():
    from scipy import integrate
    s, d = 1.25, 1e-2
    n2 = 2 / np.pi * integrate.quad(lambda p: (1 - np.cos(p * d)) * (1 + p * p) ** -s,
                                    0, np.inf, limit=2000, epsabs=1e-14)[0]
    assert restriction_holder_norm(s, d) == pytest.approx(np.sqrt(n2), rel=1e-6)
    s = 2.25
    r2 = 1 / np.pi * integrate.quad(lambda p: np.abs((np.exp(1j * p * d) - 1) / d - 1j * p) ** 2
                                    * (1 + p * p) ** -s, 0, np.inf, limit=4000, epsabs=1e-14)[0]
    assert restriction_derivative_remainder(s, d) == pytest.approx(np.sqrt(r2), rel=1e-5)


def test_regularity_report(lorentz_model):
    rep = restriction_regularity_test(lorentz_model.potentials[0], 0.3, orders=2)
    assert rep.passed
    assert rep["operator_holder(s=1)"].measured == pytest.approx(0.5, rel=0.01)
    assert rep["operator_derivative(s=2)"].measured == pytest.approx(0.5, rel=0.01)
