"""Free and interacting time evolution, wave operators and the S action.

In the Friedrichs model ``H0 = Q`` acts by multiplication, so free evolution
is the phase ``exp(-i t x)`` and the full evolution is split as

    exp(-i dt H) ~ exp(-i dt x / 2) exp(-i dt V) exp(-i dt x / 2).

The kick ``exp(-i dt V)`` is exact for the finite-rank potential built from
the sampled profiles: with ``W`` the sampled vectors and ``G = W* W`` their
grid Gram matrix,

    exp(-i dt W L W*) = 1 + W G^{-1/2} (exp(-i dt G^{1/2} L G^{1/2}) - 1) G^{-1/2} W*,

which reduces to ``1 + sum_j (exp(-i dt l_j) - 1) P_j`` for orthonormal
samples.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import linalg

from .exceptions import ContractError, ConvergenceError
from .grid import (Representation, WaveFunction, as_momentum, as_position,
                   check_interior)

__all__ = [
    "free_evolve", "free_evolve_friedrichs", "FriedrichsPropagator",
    "friedrichs_evolve", "wave_operator", "scatter", "scatter_with_tails",
    "cook_decay", "fit_power_law", "WaveOperatorResult", "ScatterResult",
    "PowerLawFit",
]


def free_evolve(phi, h, t, check=True):
    """``exp(-i t h(P)) phi``, returned in the representation of ``phi``."""
    pk = as_momentum(phi)
    out = pk.replace(pk.samples * np.exp(-1j * t * h.h(pk.grid.k)))
    out_x = as_position(out)
    if check:
        check_interior(out_x, what=f"free evolution to t = {t:g}")
    return out_x if phi.representation is Representation.POSITION else out


def free_evolve_friedrichs(phi, t, check=True):
    """``exp(-i t Q) phi``: a phase in position, a momentum shift by ``-t``."""
    px = as_position(phi)
    out = px.replace(px.samples * np.exp(-1j * t * px.grid.x))
    if check:
        check_interior(as_momentum(out), what=f"Friedrichs free evolution to t = {t:g}")
    return out if phi.representation is Representation.POSITION else as_momentum(out)


class FriedrichsPropagator:
    """Strang-split propagator for ``H = Q + V`` on a fixed grid and step.

    Parameters
    ----------
    model : FriedrichsModel
    grid : Grid
    dt : float
        Time step; negative values propagate backwards.
    """

    def __init__(self, model, grid, dt):
        if dt == 0:
            raise ContractError("dt must be nonzero")
        self.model = model
        self.grid = grid
        self.dt = float(dt)
        self.half_phase = np.exp(-0.5j * self.dt * grid.x)
        self.full_phase = self.half_phase**2
        n = model.rank
        if model.is_trivial:
            self.W = None
            return
        self.W = model.values(grid.x)
        G = (self.W.conj() @ self.W.T) * grid.dx
        Gh = linalg.sqrtm(G)
        Gih = linalg.inv(Gh)
        M = Gh @ np.diag(model.couplings) @ Gh
        M = 0.5 * (M + M.conj().T)
        self.K = Gih @ (linalg.expm(-1j * self.dt * M) - np.eye(n)) @ Gih
        self.gram = G

    def kick(self, psi):
        if self.W is None:
            return psi
        c = (self.W.conj() @ psi) * self.grid.dx
        return psi + self.W.T @ (self.K @ c)

    def step(self, psi, n_steps=1):
        """Advance raw position samples by ``n_steps`` steps."""
        if self.W is None:
            return psi * self.full_phase**n_steps if n_steps else psi
        psi = psi * self.half_phase
        for i in range(n_steps):
            psi = self.kick(psi)
            psi = psi * (self.full_phase if i < n_steps - 1 else self.half_phase)
        return psi


def _n_steps(t, dt):
    n = int(round(t / dt))
    if n < 0 or abs(n * dt - t) > 1e-9 * max(1.0, abs(t)):
        raise ContractError(f"dt = {dt:g} does not divide t = {t:g}")
    return n


def friedrichs_evolve(phi, model, t, dt, norm_tol=1e-8, check=True):
    """``exp(-i t H) phi`` by Strang splitting with the exact finite-rank kick.

    ``dt`` carries the sign of ``t``.
    """
    if t == 0:
        return phi
    dt = abs(dt) * np.sign(t)
    n = _n_steps(t, dt)
    px = as_position(phi)
    prop = FriedrichsPropagator(model, px.grid, dt)
    out = prop.step(px.samples, n)
    _check_norm(px.samples, out, norm_tol)
    res = px.replace(out)
    if check:
        check_interior(as_momentum(res), what=f"interacting evolution to t = {t:g}")
    return res if phi.representation is Representation.POSITION else as_momentum(res)


def _check_norm(a, b, tol):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na > 0 and abs(nb - na) > tol * na:
        raise ConvergenceError(f"norm drift {abs(nb - na) / na:.2e}", stage="instability")


class PowerLawFit(NamedTuple):
    exponent: float
    prefactor: float
    r_squared: float
    taus: np.ndarray
    values: np.ndarray


def fit_power_law(taus, values):
    """Least-squares fit of ``log values = log C - zeta log tau``."""
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    ok = values > 0
    lt, lv = np.log(taus[ok]), np.log(values[ok])
    if lt.size < 3:
        return PowerLawFit(np.nan, np.nan, np.nan, taus, values)
    A = np.vstack([np.ones_like(lt), lt]).T
    coef, *_ = np.linalg.lstsq(A, lv, rcond=None)
    pred = A @ coef
    ss_res = np.sum((lv - pred) ** 2)
    ss_tot = np.sum((lv - lv.mean()) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(-coef[1]), float(np.exp(coef[0])), float(r2), taus, values)


def cook_decay(phi, model, taus):
    """``|V exp(-i tau H0) phi|`` at the given (signed) times."""
    px = as_position(phi)
    x, dx = px.grid.x, px.grid.dx
    W = model.values(x)
    lam = model.couplings
    out = np.empty(len(taus))
    for i, tau in enumerate(taus):
        c = (W.conj() @ (np.exp(-1j * tau * x) * px.samples)) * dx
        out[i] = np.sqrt(np.sum((lam * np.abs(c)) ** 2))
    return out


def _tail(phi, model, T, sign, n_fit=40):
    """Cook tail ``int_T^inf |V exp(-i sign tau H0) phi| dtau`` from a power fit."""
    taus = np.geomspace(T / 10.0, T, n_fit)
    vals = cook_decay(phi, model, sign * taus)
    fit = fit_power_law(taus, vals)
    floor = 1e-14 * max(np.linalg.norm(phi.samples) * np.sqrt(phi.grid.dx), 1e-300)
    if np.all(vals[-n_fit // 4:] <= floor):
        return 0.0, fit
    if not fit.exponent > 1:
        return np.inf, fit
    tail = fit.prefactor * T ** (1.0 - fit.exponent) / (fit.exponent - 1.0)
    return float(tail), fit


class WaveOperatorResult(NamedTuple):
    state: WaveFunction
    tail_estimate: float
    converged: bool
    decay_fit: PowerLawFit


def wave_operator(phi, model, direction, T_max, dt, tail_tol=1e-4):
    """``W_(+/-) phi`` truncated at ``T_max`` with a Cook tail estimate.

    ``W_- phi ~ exp(-i T H) exp(i T H0) phi`` and
    ``W_+ phi ~ exp(i T H) exp(-i T H0) phi`` with ``T = T_max``.
    """
    if direction not in ("plus", "minus", "+", "-"):
        raise ContractError("direction must be 'plus' or 'minus'")
    sign = 1.0 if direction in ("minus", "-") else -1.0
    px = as_position(phi)
    if model.is_trivial:
        return WaveOperatorResult(px, 0.0, True, PowerLawFit(np.nan, 0.0, np.nan, None, None))
    start = free_evolve_friedrichs(px, -sign * T_max)
    out = friedrichs_evolve(start, model, sign * T_max, dt)
    tail, fit = _tail(px, model, T_max, -sign)
    nrm = np.sqrt(np.vdot(px.samples, px.samples).real * px.grid.dx)
    return WaveOperatorResult(out, tail, bool(tail <= tail_tol * nrm), fit)


class ScatterResult(NamedTuple):
    state: WaveFunction
    tail_estimate: float
    converged: bool


def scatter_with_tails(phi, model, T_max, dt, tail_tol=1e-4):
    """``S phi ~ exp(i T H0) exp(-2 i T H) exp(i T H0) phi`` with both Cook tails."""
    px = as_position(phi)
    if model.is_trivial:
        return ScatterResult(px, 0.0, True)
    start = free_evolve_friedrichs(px, -T_max)
    mid = friedrichs_evolve(start, model, 2 * T_max, dt)
    out = free_evolve_friedrichs(mid, -T_max)
    t_in, _ = _tail(px, model, T_max, -1.0)
    t_out, _ = _tail(out, model, T_max, 1.0)
    tail = t_in + t_out
    nrm = np.sqrt(np.vdot(px.samples, px.samples).real * px.grid.dx)
    return ScatterResult(out, tail, bool(tail <= tail_tol * nrm))


def scatter(phi, model, T_max, dt, strict=True):
    """``S phi`` as a position-representation state.

    Raises ``ConvergenceError`` when the Cook tails exceed tolerance and
    ``strict`` is set.
    """
    res = scatter_with_tails(phi, model, T_max, dt)
    if strict and not res.converged:
        raise ConvergenceError(f"wave operator tails {res.tail_estimate:.2e} too large",
                               stage="wave_operator")
    return res.state
