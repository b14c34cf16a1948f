"""Sojourn times, time delays and the integral formula for A_f.

Two pictures are supported.

* standard: ``H0 = h(P)`` with localization ``f(Q/r)``; pass a
  ``DispersionRelation`` as ``h``.
* Friedrichs: ``H0 = Q`` with localization ``f(P/r)``; pass ``h=None``.  Free
  evolution is the phase ``exp(-i t x)`` and the momentum density moves
  rigidly towards negative momenta.

Momentum-space weights ``<psi, f(P/r) psi>`` are computed from the exact
transform of the sampled state: for smooth ``f`` the density is sampled on a
zero-padded (finer) momentum grid, and for characteristic ``f`` the interval
integrals are summed in closed form from the autocorrelation of the samples,

    int_a^b |psi_hat(k)|^2 dk = dx^2/(2 pi) sum_n A_n int_a^b exp(-i k n dx) dk,

so no momentum discretization error enters.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np
from scipy import integrate, optimize

from .exceptions import BoxOverflowError, ContractError, ConvergenceError
from .grid import _backward, _forward, as_momentum, as_position, mixed_expectation, apply_symbol
from .localization import F_f, R_f_grad
from .propagation import FriedrichsPropagator, _tail
from .stationary import apply_s_matrix, ew_time_delay

__all__ = [
    "SojournConfig", "SweepRow", "SweepReport", "Extrapolation", "SojournResult",
    "free_sojourn", "full_sojourn", "time_delays", "integral_formula_lhs",
    "a_f_expectation", "apply_A", "commutator_residual", "tau_free", "sweep",
    "extrapolate", "a_f_symbol", "f_operator_symbol", "friedrichs_rows",
]

EXTRAPOLATIONS = ("none", "richardson", "power_fit")
S_SOURCES = ("stationary", "dynamic", "both")


@dataclass(frozen=True)
class SojournConfig:
    """Discretization policy for the limits ``r -> infinity`` and the time integrals.

    The time integrals run over ``|t| <= t_cutoff_factor * r + t_margin`` with
    samples every ``dt * sample_stride``; ``dt`` is the Strang step.  The
    interacting evolution is integrated on ``[-interaction_time,
    interaction_time]`` and continued freely outside it.
    """

    r_schedule: tuple = (2.0, 4.0, 8.0, 16.0, 32.0)
    t_cutoff_factor: float = 8.0
    dt: float = 0.01
    quad_tol: float = 1e-9
    extrapolation: str = "power_fit"
    t_margin: float = 10.0
    sample_stride: int = 10
    density_pad: int = 2
    interaction_time: float = 30.0
    s_source: str = "stationary"
    tail_tol: float = 1e-4

    def __post_init__(self):
        r = tuple(float(v) for v in self.r_schedule)
        object.__setattr__(self, "r_schedule", r)
        if not r or any(v <= 0 for v in r) or any(b <= a for a, b in zip(r, r[1:])):
            raise ContractError("r_schedule must be strictly increasing and positive")
        if not self.dt > 0:
            raise ContractError("dt must be positive")
        if self.extrapolation not in EXTRAPOLATIONS:
            raise ContractError(f"extrapolation must be one of {EXTRAPOLATIONS}")
        if self.s_source not in S_SOURCES:
            raise ContractError(f"s_source must be one of {S_SOURCES}")
        if int(self.sample_stride) < 1 or int(self.density_pad) < 1:
            raise ContractError("sample_stride and density_pad must be positive integers")

    @property
    def sample_dt(self):
        return self.dt * int(self.sample_stride)

    def t_max(self, r):
        return self.t_cutoff_factor * r + self.t_margin

    def with_(self, **kw):
        return replace(self, **kw)


class SojournResult(NamedTuple):
    value: float
    error_estimate: float
    t_max: float


# -- weights ---------------------------------------------------------------


class _MomentumWeights:
    """``<psi, f(P/r) psi>`` for several ``r`` from position samples."""

    def __init__(self, grid, f, r_values, pad):
        if f.dim != 1:
            raise ContractError("localization must be one-dimensional")
        self.grid, self.pad = grid, int(pad)
        self.r = np.asarray(r_values, dtype=float)
        n = self.pad * grid.n_points
        kmax = grid.k_max
        if f.intervals is not None:
            reach = self.r.max() * max(abs(e) for iv in f.intervals for e in iv)
            if reach >= kmax:
                raise ContractError(
                    f"r * support = {reach:.4g} exceeds the momentum window {kmax:.4g}")
            m = np.arange(n)
            m = np.where(m < n // 2, m, m - n).astype(float)
            d = grid.dx
            C = np.zeros((self.r.size, n), dtype=complex)
            nz = m != 0
            for a, b in f.intervals:
                A, B = self.r * a, self.r * b
                C[:, ~nz] += (B - A)[:, None]
                C[:, nz] += (np.exp(-1j * np.outer(B, m[nz] * d))
                             - np.exp(-1j * np.outer(A, m[nz] * d))) / (-1j * m[nz] * d)
            self.C = C * d**2 / (2 * np.pi)
            self.mode = "exact"
        else:
            dkf = grid.dk / self.pad
            k = dkf * (np.arange(n) - n // 2)
            F = f.evaluate(k[None, :, None] / self.r[:, None, None])
            edge = max(1, int(0.1 * n))
            if np.max(np.abs(F[:, :edge]), initial=0) > 1e-13 or np.max(np.abs(F[:, -edge:]), initial=0) > 1e-13:
                raise ContractError("f(k/r) does not vanish near the momentum window edge; "
                                    "refine the grid")
            self.F = F * dkf
            self.mode = "density"

    def __call__(self, samples):
        g = self.grid
        n = self.pad * g.n_points
        if self.mode == "exact":
            Fk = np.fft.fft(samples, n)
            dens = np.abs(Fk) ** 2
            _edge_check(np.fft.fftshift(dens), "momentum")
            A = np.fft.ifft(dens)
            return (self.C @ A).real
        vals = _forward(samples, g.x_min, g.dx, n_out=n)
        dens = np.abs(vals) ** 2
        _edge_check(dens, "momentum")
        return self.F @ dens


class _PositionWeights:
    """``<psi, f(Q/r) psi>`` for several ``r`` from momentum samples.

    Characteristic ``f`` uses the dual of the exact momentum weights: the
    momentum samples define a trigonometric interpolant in ``x`` whose
    interval integrals follow from their autocorrelation.
    """

    def __init__(self, grid, f, r_values, pad):
        self.grid, self.pad = grid, int(pad)
        self.r = np.asarray(r_values, dtype=float)
        if f.intervals is not None:
            if f.dim != 1:
                raise ContractError("localization must be one-dimensional")
            lo = self.r.max() * min(iv[0] for iv in f.intervals)
            hi = self.r.max() * max(iv[1] for iv in f.intervals)
            if lo <= grid.x_min or hi >= grid.x_max:
                raise ContractError(
                    f"r * support [{lo:.4g}, {hi:.4g}] leaves the box "
                    f"[{grid.x_min:.4g}, {grid.x_max:.4g}]")
            n = max(self.pad, 2) * grid.n_points
            m = np.arange(n)
            m = np.where(m < n // 2, m, m - n).astype(float)
            d = grid.dk
            nz = m != 0
            C = np.zeros((self.r.size, n), dtype=complex)
            for a, b in f.intervals:
                A, B = self.r * a, self.r * b
                C[:, ~nz] += (B - A)[:, None]
                C[:, nz] += (np.exp(1j * np.outer(B, m[nz] * d))
                             - np.exp(1j * np.outer(A, m[nz] * d))) / (1j * m[nz] * d)
            self.C = C * d**2 / (2 * np.pi)
            self.n_exact = n
            self.mode = "exact"
            return
        if not f.is_smooth:
            raise ContractError("non-smooth localization must be a characteristic function")
        n = self.pad * grid.n_points
        dxf = grid.dx / self.pad
        x = grid.x_min + dxf * np.arange(n)
        self.F = f.evaluate(x[None, :, None] / self.r[:, None, None]) * dxf
        self.lo = n // 2 - grid.n_points // 2
        self.mode = "density"

    def __call__(self, k_samples):
        g = self.grid
        if self.mode == "exact":
            _edge_check(np.abs(_backward(k_samples, g.x_min, g.dx)) ** 2, "position")
            Fc = np.fft.fft(k_samples, self.n_exact)
            B = np.fft.ifft(np.abs(Fc) ** 2)
            return (self.C @ B).real
        n = self.pad * g.n_points
        big = np.zeros(n, dtype=complex)
        big[self.lo:self.lo + g.n_points] = k_samples
        vals = _backward(big, g.x_min, g.dx / self.pad)
        dens = np.abs(vals) ** 2
        _edge_check(dens, "position")
        return self.F @ dens


def _edge_check(dens, what, fraction=0.1, tol=1e-10):
    n = dens.size
    m = max(1, int(fraction * n))
    tot = dens.sum()
    if tot > 0:
        e = (dens[:m].sum() + dens[n - m:].sum()) / tot
        if e > tol:
            raise BoxOverflowError(f"relative {what} mass {e:.2e} near the box edge")


def _times(cfg, r_values, extra=0.0):
    d = cfg.sample_dt
    T = max(max(cfg.t_max(r) for r in r_values), extra)
    n = int(np.ceil(T / d - 1e-9))
    return np.arange(-n, n + 1) * d


def _free_weights(phi, h, f, r_values, cfg):
    t = _times(cfg, r_values)
    if h is None:
        px = as_position(phi)
        wf = _MomentumWeights(px.grid, f, r_values, cfg.density_pad)
        x = px.grid.x
        W = np.array([wf(np.exp(-1j * ti * x) * px.samples) for ti in t]).T
    else:
        pk = as_momentum(phi)
        wf = _PositionWeights(pk.grid, f, r_values, cfg.density_pad)
        e = h.h(pk.grid.k)
        W = np.array([wf(np.exp(-1j * ti * e) * pk.samples) for ti in t]).T
    return t, W


# -- time integrals ----------------------------------------------------------


def _tail_integral(t, w, where):
    """Power-law extrapolation of ``int_T^inf w`` from the last samples."""
    scale = np.max(np.abs(w), initial=0.0)
    if scale == 0 or abs(w[-1]) <= 1e-14 * scale:
        return 0.0
    m = max(4, len(t) // 5)
    tt, ww = np.abs(t[-m:]), np.abs(w[-m:])
    ok = (ww > 0) & (tt > 0)
    if ok.sum() < 3:
        return 0.0
    p, logc = np.polyfit(np.log(tt[ok]), np.log(ww[ok]), 1)
    p = -p
    if not p > 1:
        raise ConvergenceError(f"{where}: integrand tail does not decay integrably "
                               f"(fitted exponent {p:.3g})", stage=where)
    T = tt[-1]
    return float(np.sign(w[-1]) * np.exp(logc) * T ** (1 - p) / (p - 1))


def _integrate(t, w, t_max, where):
    """Trapezoid over ``|t| <= t_max`` plus both tails; returns value and error."""
    sel = np.abs(t) <= t_max + 1e-9
    ts, ws = t[sel], w[sel]
    val = integrate.trapezoid(ws, ts)
    coarse = integrate.trapezoid(ws[::2], ts[::2]) if ws.size % 2 == 1 else val
    neg = ts <= 0
    pos = ts >= 0
    tail = _tail_integral(ts[pos], ws[pos], where) + _tail_integral(ts[neg][::-1], ws[neg][::-1], where)
    return val + tail, abs(val - coarse) + abs(tail)


def _integrate_odd(t, w, t_max, where):
    """``int_0^T [w(t) - w(-t)] dt`` plus the tail."""
    sel = (t >= -1e-12) & (t <= t_max + 1e-9)
    tp = t[sel]
    idx = np.nonzero(sel)[0]
    mirror = len(t) - 1 - idx
    d = w[idx] - w[mirror]
    val = integrate.trapezoid(d, tp)
    tail = _tail_integral(tp, d, where)
    coarse = integrate.trapezoid(d[::2], tp[::2]) if d.size % 2 == 1 else val
    return val + tail, abs(val - coarse) + abs(tail)


# -- public sojourn functionals ----------------------------------------------


def _as_list(r):
    return [float(v) for v in np.atleast_1d(r)]


def free_sojourn(phi, h, f, r, cfg=None, full_output=False):
    """Free sojourn time ``T0_r(phi) = int <phi_t, f(./r) phi_t> dt``.

    ``h=None`` selects the Friedrichs picture (``H0 = Q``, ``f(P/r)``).
    """
    cfg = cfg or SojournConfig()
    rs = _as_list(r)
    t, W = _free_weights(phi, h, f, rs, cfg)
    out = [SojournResult(*_integrate(t, W[i], cfg.t_max(ri), "free_sojourn"), cfg.t_max(ri))
           for i, ri in enumerate(rs)]
    if not full_output:
        out = [o.value for o in out]
    return out[0] if np.ndim(r) == 0 else out


def integral_formula_lhs(phi, h, f, r, cfg=None, full_output=False):
    """``int_0^inf <phi, [e^{itH0} f e^{-itH0} - e^{-itH0} f e^{itH0}] phi> dt``.

    For large ``r`` this tends to ``<phi, A_f phi>`` (``2 <phi, P phi>`` in the
    Friedrichs picture, ``h=None``).
    """
    cfg = cfg or SojournConfig()
    rs = _as_list(r)
    t, W = _free_weights(phi, h, f, rs, cfg)
    out = [SojournResult(*_integrate_odd(t, W[i], cfg.t_max(ri), "integral_formula"), cfg.t_max(ri))
           for i, ri in enumerate(rs)]
    if not full_output:
        out = [o.value for o in out]
    return out[0] if np.ndim(r) == 0 else out


def a_f_symbol(h, f, quad_tol=1e-9):
    """Vectorized ``g(p) = R_f'(h'(p))`` in one dimension.

    Radial ``f`` uses ``R_f'(y) = -1/y``; otherwise the homogeneity
    ``R_f'(y) = R_f'(sign y) / |y|`` reduces the work to two quadratures.
    """
    if f.dim != 1:
        raise ContractError("a_f_symbol is one-dimensional")
    if f.is_radial:
        return lambda p: -1.0 / h.h_prime(p)
    plus = float(R_f_grad(f, 1.0, quad_tol)[0])
    minus = float(R_f_grad(f, -1.0, quad_tol)[0])

    def g(p):
        y = h.h_prime(p)
        return np.where(y > 0, plus, minus) / np.abs(y)

    return g


def a_f_expectation(phi, h, f, quad_tol=1e-9):
    """``<phi, A_f phi>`` with ``A_f = Q g(P) + g(P) Q`` and ``g = R_f' o h'``."""
    g = a_f_symbol(h, f, quad_tol)
    val = mixed_expectation(phi, g, True) + mixed_expectation(phi, g, False)
    return float(val.real)


def apply_A(phi, h, f, quad_tol=1e-9):
    """``A_f phi`` as a position-representation state."""
    g = a_f_symbol(h, f, quad_tol)
    px = as_position(phi)
    x = px.grid.x
    gphi = apply_symbol(px, g).samples
    gqphi = apply_symbol(px.replace(x * px.samples), g).samples
    return px.replace(x * gphi + gqphi)


def commutator_residual(psi, phi, h, f):
    """``<psi, [A, h(P)] phi> + 2i <psi, phi>``; zero on admissible pairs."""
    px, qx = as_position(phi), as_position(psi)
    hphi = apply_symbol(px, h.h)
    lhs = np.vdot(qx.samples, apply_A(hphi, h, f).samples) \
        - np.vdot(apply_symbol(qx, h.h).samples, apply_A(px, h, f).samples)
    rhs = -2j * np.vdot(qx.samples, px.samples)
    return complex((lhs - rhs) * px.grid.dx)


def f_operator_symbol(h, f, p, quad_tol=1e-9):
    """``F_f(h'(p))`` on the given momenta (one-dimensional)."""
    y = np.asarray(h.h_prime(p), dtype=float)
    plus, minus = F_f(f, 1.0, quad_tol), F_f(f, -1.0, quad_tol)
    with np.errstate(divide="ignore"):
        return np.where(y > 0, plus, minus) / np.abs(y)


# -- Friedrichs sweep ----------------------------------------------------------


@dataclass
class SweepRow:
    r: float
    T0_r: float
    T0_r_S: float
    T_r: float
    tau_r: float
    tau_in_r: float
    tail_estimate: float
    tau_free: float = np.nan


@dataclass
class Extrapolation:
    limit: float
    exponent: float
    ok: bool
    note: str = ""


@dataclass
class SweepReport:
    rows: list
    extrapolated_limit: float
    ew_reference: float
    relative_gap: float
    fitted_exponent: float = np.nan
    extrapolation_ok: bool = True
    extrapolation_note: str = ""
    s_cross_check: float = np.nan
    cook_tail: float = 0.0
    converged: bool = True
    meta: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([getattr(row, name) for row in self.rows])


def _interacting_weights(phi, model, wf, t, cfg):
    """Weights along ``exp(-itH) W_- phi`` at the sample times ``t``."""
    px = as_position(phi)
    x = px.grid.x
    d = cfg.sample_dt
    stride = int(cfg.sample_stride)
    k_int = int(round(cfg.interaction_time / d))
    T_int = k_int * d
    n = (len(t) - 1) // 2
    W = np.empty((wf.r.size, len(t)))
    prop = FriedrichsPropagator(model, px.grid, cfg.dt)
    psi = np.exp(1j * T_int * x) * px.samples
    norm0 = np.linalg.norm(psi)
    for i in range(-k_int, k_int + 1):
        if i > -k_int:
            psi = prop.step(psi, stride)
        if abs(i) <= n:
            W[:, i + n] = wf(psi)
    if abs(np.linalg.norm(psi) - norm0) > 1e-8 * norm0:
        raise ConvergenceError("norm drift in interacting evolution", stage="instability")
    psi_T = psi
    for i in range(-n, -k_int):
        W[:, i + n] = wf(np.exp(-1j * t[i + n] * x) * px.samples)
    for i in range(k_int + 1, n + 1):
        W[:, i + n] = wf(np.exp(-1j * (t[i + n] - T_int) * x) * psi_T)
    S_dyn = px.replace(np.exp(1j * T_int * x) * psi_T)
    return W, S_dyn


def friedrichs_rows(phi, model, f, r_values, cfg, with_tau_free=True):
    """Sojourn numbers for each ``r`` from one interacting trajectory.

    Returns ``(rows, info)`` where ``info`` carries ``S phi`` and diagnostics.
    """
    px = as_position(phi)
    rs = _as_list(r_values)
    wf = _MomentumWeights(px.grid, f, rs, cfg.density_pad)
    t = _times(cfg, rs)
    x = px.grid.x
    W0 = np.array([wf(np.exp(-1j * ti * x) * px.samples) for ti in t]).T
    info = {"cook_tail": 0.0, "s_cross_check": np.nan}
    if model.is_trivial:
        W, S_phi = W0, px
    else:
        W, S_dyn = _interacting_weights(px, model, wf, t, cfg)
        tin, _ = _tail(px, model, cfg.interaction_time, -1.0)
        tout, _ = _tail(S_dyn, model, cfg.interaction_time, 1.0)
        info["cook_tail"] = tin + tout
        if cfg.s_source == "dynamic":
            S_phi = S_dyn
        else:
            S_phi = apply_s_matrix(model, px)
            if cfg.s_source == "both":
                info["s_cross_check"] = float(np.max(np.abs(S_phi.samples - S_dyn.samples)))
    WS = np.array([wf(np.exp(-1j * ti * x) * S_phi.samples) for ti in t]).T
    rows = []
    for i, r in enumerate(rs):
        tm = cfg.t_max(r)
        T0, e0 = _integrate(t, W0[i], tm, "free_sojourn")
        T0S, e1 = _integrate(t, WS[i], tm, "free_sojourn")
        Tr, e2 = _integrate(t, W[i], tm, "full_sojourn")
        tf = np.nan
        if with_tau_free:
            l1, _ = _integrate_odd(t, WS[i], tm, "tau_free")
            l0, _ = _integrate_odd(t, W0[i], tm, "tau_free")
            tf = 0.5 * (l1 - l0)
        rows.append(SweepRow(r, T0, T0S, Tr, Tr - 0.5 * (T0 + T0S), Tr - T0,
                             e0 + e1 + e2 + info["cook_tail"], tf))
    info["S_phi"] = S_phi
    return rows, info


def full_sojourn(phi, model, f, r, cfg=None):
    """Interacting sojourn time ``T_r(phi)`` along ``exp(-itH) W_- phi``."""
    cfg = cfg or SojournConfig()
    rows, _ = friedrichs_rows(phi, model, f, _as_list(r), cfg, with_tau_free=False)
    vals = [row.T_r for row in rows]
    return vals[0] if np.ndim(r) == 0 else vals


def time_delays(phi, model, f, r, cfg=None):
    """``{"tau_r", "tau_in_r"}`` (plus the three sojourn times) at one ``r``."""
    cfg = cfg or SojournConfig()
    row = friedrichs_rows(phi, model, f, [float(r)], cfg, with_tau_free=False)[0][0]
    return {"tau_r": row.tau_r, "tau_in_r": row.tau_in_r, "T_r": row.T_r,
            "T0_r": row.T0_r, "T0_r_S": row.T0_r_S}


def tau_free(phi, model, f, r, cfg=None, S_phi=None):
    """``(LHS_r(S phi) - LHS_r(phi)) / 2`` with the Friedrichs integral formula."""
    cfg = cfg or SojournConfig()
    if S_phi is None:
        S_phi = apply_s_matrix(model, as_position(phi))
    a = integral_formula_lhs(S_phi, None, f, r, cfg)
    b = integral_formula_lhs(phi, None, f, r, cfg)
    return 0.5 * (np.asarray(a) - np.asarray(b)) if np.ndim(r) else 0.5 * (a - b)


def extrapolate(r, tau, method="power_fit", n_last=4, floor=1e-8):
    """Limit of ``tau_r`` as ``r -> infinity``.

    ``power_fit`` fits ``tau_inf + c r^(-q)`` to the last ``n_last`` points and
    requires ``q > 0``; ``richardson`` applies Aitken's delta-squared step to
    the last three.  When the last gaps are below ``floor * max(1, |tau|)`` the
    sequence is taken as converged and the last value is returned.
    """
    r = np.asarray(r, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if method == "none" or tau.size < 3:
        return Extrapolation(float(tau[-1]), np.nan, method == "none", "last value")
    scale = max(1.0, float(np.max(np.abs(tau))))
    gaps = np.abs(np.diff(tau))
    if np.all(gaps[-2:] <= floor * scale):
        return Extrapolation(float(tau[-1]), np.nan, True, "converged below noise floor")
    big = gaps[gaps > floor * scale]
    monotone = bool(np.all(np.diff(big) < 0))
    if method == "richardson":
        t1, t2, t3 = tau[-3:]
        d1, d2 = t2 - t1, t3 - t2
        if d1 == d2:
            return Extrapolation(float(t3), np.nan, False, "degenerate differences")
        lim = t3 - d2 * d2 / (d2 - d1)
        q = np.log(abs(d1 / d2)) / np.log(r[-1] / r[-2]) if d2 != 0 else np.inf
        return Extrapolation(float(lim), float(q), bool(q > 0 and monotone),
                             "" if monotone else "non-monotone gaps")
    rr, tt = r[-n_last:], tau[-n_last:]

    def model(x, a, c, q):
        return a + c * x ** (-q)

    q0 = np.log(max(gaps[-2], 1e-300) / max(gaps[-1], 1e-300)) / np.log(r[-1] / r[-2])
    q0 = q0 if np.isfinite(q0) and q0 > 0 else 1.0
    c0 = (tt[0] - tt[-1]) / (rr[0] ** -q0 - rr[-1] ** -q0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p, _ = optimize.curve_fit(model, rr, tt, p0=(tt[-1], c0, q0), maxfev=20000)
        lim, _, q = map(float, p)
    except (RuntimeError, ValueError):
        return Extrapolation(float(tau[-1]), np.nan, False, "power fit failed")
    ok = q > 0 and monotone and np.isfinite(lim)
    note = "" if ok else ("q <= 0" if not q > 0 else "non-monotone gaps")
    return Extrapolation(lim if ok else float(tau[-1]), q, bool(ok), note)


def sweep(phi, model, f, cfg=None, ew_reference=None):
    """Run the ``r`` schedule for a Friedrichs model and extrapolate ``tau_r``."""
    cfg = cfg or SojournConfig()
    rows, info = friedrichs_rows(phi, model, f, cfg.r_schedule, cfg)
    r = np.array([row.r for row in rows])
    tau = np.array([row.tau_r for row in rows])
    ex = extrapolate(r, tau, cfg.extrapolation)
    if ew_reference is None:
        ew_reference = ew_time_delay(model, as_position(phi))
    gap = abs(ex.limit - ew_reference)
    rel = gap / abs(ew_reference) if ew_reference != 0 else gap
    converged = bool(info["cook_tail"] <= cfg.tail_tol)
    return SweepReport(rows, ex.limit, float(ew_reference), float(rel), ex.exponent, ex.ok,
                       ex.note, info["s_cross_check"], info["cook_tail"], converged)
