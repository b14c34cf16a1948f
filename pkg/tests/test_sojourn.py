import numpy as np
import pytest

from timedelay.dispersion import builtin
from timedelay.exceptions import BoxOverflowError, ContractError, ConvergenceError
from timedelay.grid import Grid, gaussian
from timedelay.localization import make_characteristic, make_plateau_bump
from timedelay.sojourn import (SojournConfig, _tail_integral, a_f_expectation,
                               commutator_residual, extrapolate, free_sojourn,
                               friedrichs_rows, integral_formula_lhs, time_delays)

CFG = SojournConfig(t_cutoff_factor=1.5, t_margin=10.0)


def test_config_contract():
    with pytest.raises(ContractError):
        SojournConfig(r_schedule=(4.0, 2.0))
    with pytest.raises(ContractError):
        SojournConfig(extrapolation="magic")
    with pytest.raises(ContractError):
        SojournConfig(sample_stride=0)
    assert CFG.t_max(4.0) == pytest.approx(16.0)
    assert CFG.with_(dt=0.02).sample_dt == pytest.approx(0.2)


@pytest.mark.parametrize("f", [make_characteristic([-1.0, 1.0]), make_plateau_bump(1, 0.5, 1.0)],
                         ids=["chi", "bump"])
def test_free_sojourn_identity(packet, f):
    rs = [5.0, 10.0, 20.0]
    vals = free_sojourn(packet, None, f, rs, CFG)
    fint = f.integral()
    assert fint == pytest.approx(2.0)
    for r, v in zip(rs, vals):
        assert abs(v - r * fint) <= 1e-6 * r


def test_free_sojourn_box_overflow():
    g = Grid.centered(512, 10.0)
    with pytest.raises(BoxOverflowError):
        free_sojourn(gaussian(g), None, make_plateau_bump(1, 0.5, 1.0), 40.0, CFG)


def test_delays_agree(packet, lorentz_model):
    d = time_delays(packet, lorentz_model, make_plateau_bump(1, 0.5, 1.0), 8.0, CFG)
    assert abs(d["tau_r"] - d["tau_in_r"]) < 1e-6
    assert d["tau_r"] == pytest.approx(-0.435447, abs=1e-5)


def test_trivial_model_has_no_delay(packet):
    from timedelay.model import FriedrichsModel, lorentzian
    m = FriedrichsModel.from_profiles([lorentzian(0)], [0.0])
    rows, _ = friedrichs_rows(packet, m, make_plateau_bump(1, 0.5, 1.0), [4.0, 8.0], CFG)
    for row in rows:
        assert row.tau_r == 0.0 and row.tau_in_r == 0.0


def test_a_f_expectation_oracle():
    # -x0 <1/p> under the normal momentum density, by scipy quad
    g = Grid.centered(16384, 800.0)
    phi = gaussian(g, 3.0, 4.0, 2.0)
    f = make_plateau_bump(1, 0.5, 1.0)
    h = builtin("schroedinger")
    assert a_f_expectation(phi, h, f) == pytest.approx(-1.5120047689812819, rel=1e-10)
    assert abs(commutator_residual(gaussian(g, -2.0, 4.0, 1.5), phi, h, f)) < 1e-8


def test_integral_formula_friedrichs(packet):
    phi = gaussian(packet.grid, 0.0, 1.0, 2.0)
    f = make_plateau_bump(1, 0.5, 1.0)
    cfg = SojournConfig(t_cutoff_factor=1.6, t_margin=15.0)
    lhs = integral_formula_lhs(phi, None, f, [8.0, 16.0], cfg)
    errs = [abs(v - 4.0) / 4.0 for v in lhs]
    assert errs[1] < errs[0] and errs[1] < 0.02


def test_extrapolation():
    r = np.array([2.0, 4.0, 8.0, 16.0, 32.0])
    ex = extrapolate(r, 1.0 + 2.0 * r**-2.0)
    assert ex.ok and ex.limit == pytest.approx(1.0, abs=1e-8)
    assert ex.exponent == pytest.approx(2.0, rel=1e-6)
    ex = extrapolate(r, 1.0 + 0.5 ** np.arange(5), method="richardson")
    assert ex.limit == pytest.approx(1.0, abs=1e-12)
    flat = extrapolate(r, np.full(5, -0.4))
    assert flat.ok and flat.limit == -0.4
    assert extrapolate(r, np.array([1.0, 2.0, 1.0, 2.0, 1.0])).ok is False


def test_slow_tail_rejected():
    t = np.linspace(1.0, 100.0, 200)
    with pytest.raises(ConvergenceError):
        _tail_integral(t, t**-0.5, "test")
    assert _tail_integral(t, t**-3.0, "test") == pytest.approx(0.5 * 100.0**-2, rel=1e-6)


def test_characteristic_position_weights_exact():
    from scipy.special import erf
    from timedelay.grid import to_momentum
    from timedelay.sojourn import _PositionWeights

    g = Grid.centered(2048, 60.0)
    # |phi|^2 is normal with mean 3 and standard deviation sqrt(2)
    pk = to_momentum(gaussian(g, 3.0, 2.0, 1.5))
    f = make_characteristic([[-2.0, -1.0], [-0.5, 0.5], [1.0, 2.0]])
    rs = [1.0, 3.0, 7.0]
    got = _PositionWeights(g, f, rs, 2)(pk.samples)
    cdf = lambda x: 0.5 * erf((x - 3.0) / 2.0)
    ref = [sum(cdf(r * b) - cdf(r * a) for a, b in f.intervals) * pk.norm() ** 2 for r in rs]
    np.testing.assert_allclose(got, ref, atol=1e-13)
    with pytest.raises(ContractError):
        _PositionWeights(g, f, [40.0], 2)
