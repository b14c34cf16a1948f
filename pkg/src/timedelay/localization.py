"""Localization functions f and their radial averages R_f, R_f' and F_f.

All families here have the form ``f(x) = f0(N(x))`` for a gauge ``N`` that is
positively homogeneous of degree one (``N(mu x) = mu N(x)``).  Along a ray
``mu -> f(mu x)`` the integrand then has its kinks at known values of ``mu``,
which the quadratures use as break points.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .exceptions import ContractError, ConvergenceError

__all__ = [
    "LocalizationFunction", "make_plateau_bump", "make_anisotropic_bump",
    "make_characteristic", "make_radial", "make_plateau_power", "smoothstep", "smoothstep_prime",
    "R_f", "R_f_grad", "F_f", "R_f_trapezoid",
]


def _psi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a, b = _psi(t), _psi(1.0 - t)
    return a / (a + b)


def smoothstep_prime(t):
    t = np.asarray(t, dtype=float)
    a, b = _psi(t), _psi(1.0 - t)
    inside = (t > 0) & (t < 1)
    out = np.zeros_like(t)
    ti = t[inside]
    ai, bi = a[inside], b[inside]
    out[inside] = (ai / ti**2 * bi + ai * bi / (1.0 - ti) ** 2) / (ai + bi) ** 2
    return out


@dataclass(frozen=True)
class LocalizationFunction:
    """Descriptor of a localization function on R^d.

    Parameters
    ----------
    dim : int
    evaluate : callable
        ``f`` on arrays of shape ``(..., dim)``.
    gradient : callable or None
        ``grad f`` on arrays of shape ``(..., dim)``, returning the same shape.
    rho : float
        Decay exponent, ``|f(x)| <= C <x>^(-rho)``.
    plateau_radius : float
        Euclidean radius of a ball on which ``f = 1``.
    gauge : callable
        Degree-one homogeneous function with ``f(x) = f0(gauge(x))``.
    kinks : tuple of float
        Gauge values where ``f0`` is not smooth or switches form.
    gauge_plateau, gauge_support : float
        ``f0 = 1`` below ``gauge_plateau``; ``f0 = 0`` above ``gauge_support``
        (``None`` when not compactly supported).
    """

    dim: int
    evaluate: Callable
    gradient: Optional[Callable]
    rho: float
    plateau_radius: float
    is_even: bool
    is_radial: bool
    is_smooth: bool
    gauge: Callable
    kinks: tuple = ()
    gauge_plateau: float = 0.0
    gauge_support: Optional[float] = None
    decay_constant: float = 1.0
    intervals: Optional[tuple] = None
    name: str = "f"
    profile: Optional[Callable] = field(default=None, repr=False)

    def __call__(self, x):
        return self.evaluate(_points(self, x))

    def integral(self, quad_tol=1e-9):
        """``int f`` over the line (``dim = 1`` only)."""
        if self.dim != 1:
            raise ContractError("integral() is defined for dim = 1")
        return F_f(self, 1.0, quad_tol=quad_tol)

    def fourier(self, s):
        """``int f(u) exp(-i u s) du`` for one-dimensional characteristic functions."""
        if self.intervals is None:
            raise ContractError("closed-form Fourier transform only for characteristic f")
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape, dtype=complex)
        small = np.abs(s) < 1e-12
        ss = np.where(small, 1.0, s)
        for a, b in self.intervals:
            out += np.where(small, b - a, (np.exp(-1j * b * ss) - np.exp(-1j * a * ss)) / (-1j * ss))
        return out


def _points(f, x):
    x = np.asarray(x, dtype=float)
    if f.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != f.dim:
        raise ContractError(f"expected points of dimension {f.dim}, got shape {x.shape}")
    return x


def _norm(x):
    return np.sqrt(np.sum(np.asarray(x) ** 2, axis=-1))


def make_radial(dim, profile, profile_prime=None, rho=np.inf, plateau_radius=0.0,
                support_radius=None, decay_constant=1.0, kinks=(), name="radial"):
    """Radial localization function ``f(x) = profile(|x|)``."""
    if dim < 1:
        raise ContractError("dim must be a positive integer")

    def evaluate(x):
        return profile(_norm(x))

    gradient = None
    if profile_prime is not None:
        def gradient(x):
            x = np.asarray(x, dtype=float)
            r = _norm(x)
            with np.errstate(invalid="ignore", divide="ignore"):
                g = np.where(r > 0, profile_prime(r) / np.where(r > 0, r, 1.0), 0.0)
            return g[..., None] * x

    return LocalizationFunction(
        dim=dim, evaluate=evaluate, gradient=gradient, rho=float(rho),
        plateau_radius=float(plateau_radius), is_even=True, is_radial=True,
        is_smooth=profile_prime is not None, gauge=_norm, kinks=tuple(kinks),
        gauge_plateau=float(plateau_radius), gauge_support=support_radius,
        decay_constant=decay_constant, name=name, profile=profile)


def make_plateau_power(dim, plateau_radius, rho):
    """``f = 1`` on ``|x| <= a`` and ``(|x|/a)^(-rho)`` beyond; continuous, not smooth."""
    if not (plateau_radius > 0 and rho > 0):
        raise ContractError("plateau_radius and rho must be positive")
    a, rho = float(plateau_radius), float(rho)

    def f0(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(r <= a, 1.0, (np.maximum(r, a) / a) ** -rho)

    f = make_radial(dim, f0, None, rho=rho, plateau_radius=a, support_radius=None,
                    decay_constant=(1.0 + a * a) ** (rho / 2), kinks=(a,),
                    name=f"plateau_power(a={a:g},rho={rho:g})")
    return f


def _bump_profile(a, d):
    def f0(r):
        return 1.0 - smoothstep((np.asarray(r, dtype=float) - a) / d)

    def f0p(r):
        return -smoothstep_prime((np.asarray(r, dtype=float) - a) / d) / d

    return f0, f0p


def make_plateau_bump(dim, plateau_radius, decay_scale):
    """Smooth radial bump: 1 on ``|x| <= a``, 0 beyond ``a + decay_scale``."""
    if not (plateau_radius > 0 and decay_scale > 0):
        raise ContractError("plateau_radius and decay_scale must be positive")
    a, d = float(plateau_radius), float(decay_scale)
    f0, f0p = _bump_profile(a, d)
    return make_radial(dim, f0, f0p, rho=np.inf, plateau_radius=a, support_radius=a + d,
                       kinks=(a, a + d), name=f"bump(a={a:g},d={d:g})")


def make_anisotropic_bump(dim, plateau_radius, decay_scale, axes):
    """Even, non-radial bump ``f0(|x / axes|)`` with the profile of ``make_plateau_bump``."""
    axes = np.asarray(axes, dtype=float)
    if axes.shape != (dim,) or np.any(axes <= 0):
        raise ContractError("axes must be a positive vector of length dim")
    if not (plateau_radius > 0 and decay_scale > 0):
        raise ContractError("plateau_radius and decay_scale must be positive")
    a, d = float(plateau_radius), float(decay_scale)
    f0, f0p = _bump_profile(a, d)

    def gauge(x):
        return _norm(np.asarray(x, dtype=float) / axes)

    def evaluate(x):
        return f0(gauge(x))

    def gradient(x):
        x = np.asarray(x, dtype=float)
        n = gauge(x)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.where(n > 0, f0p(n) / np.where(n > 0, n, 1.0), 0.0)
        return g[..., None] * x / axes**2

    return LocalizationFunction(
        dim=dim, evaluate=evaluate, gradient=gradient, rho=np.inf,
        plateau_radius=a * axes.min(), is_even=True, is_radial=False, is_smooth=True,
        gauge=gauge, kinks=(a, a + d), gauge_plateau=a, gauge_support=a + d,
        name=f"anisotropic_bump(a={a:g},d={d:g})", profile=f0)


def _merge(intervals):
    iv = sorted((float(a), float(b)) for a, b in intervals)
    out = []
    for a, b in iv:
        if b <= a:
            raise ContractError(f"empty interval [{a}, {b}]")
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def make_characteristic(J, dim=1):
    """Indicator of a symmetric finite union of intervals containing 0 in its interior."""
    if dim != 1:
        raise ContractError("characteristic localization is one-dimensional")
    if np.ndim(J) == 1:
        J = [J]
    merged = _merge(J)
    mirrored = _merge([(-b, -a) for a, b in merged])
    if not np.allclose(merged, mirrored, rtol=0, atol=1e-14):
        raise ContractError(f"J = {merged} is not symmetric about 0")
    inner = [(a, b) for a, b in merged if a < 0 < b]
    if not inner:
        raise ContractError("0 must be an interior point of J")
    delta = min(-inner[0][0], inner[0][1])
    ends = sorted({abs(e) for iv in merged for e in iv})
    edges = np.array(merged)

    def evaluate(x):
        u = np.asarray(x, dtype=float)[..., 0]
        inside = np.zeros(u.shape, dtype=bool)
        for a, b in edges:
            inside |= (u >= a) & (u <= b)
        return inside.astype(float)

    return LocalizationFunction(
        dim=1, evaluate=evaluate, gradient=None, rho=np.inf, plateau_radius=delta,
        is_even=True, is_radial=True, is_smooth=False, gauge=_norm, kinks=tuple(ends),
        gauge_plateau=delta, gauge_support=ends[-1], intervals=tuple(map(tuple, merged)),
        name=f"chi{merged}")


def _ray(f, x):
    x = _points(f, x).reshape(f.dim)
    n = float(f.gauge(x))
    if not n > 0:
        raise ContractError("R_f and F_f are defined for x != 0")
    return x, n


def _tail_cut(f, n, quad_tol, extra_power):
    """Upper limit ``M`` beyond which the decay majorant is below ``quad_tol/10``."""
    if f.gauge_support is not None:
        return f.gauge_support / n, 0.0
    p = f.rho + extra_power
    if not p > 0:
        raise ContractError(f"tail does not converge for rho = {f.rho}")
    cut = (10.0 * f.decay_constant / (p * quad_tol)) ** (1.0 / p) / n
    return cut, quad_tol / 10.0


def _quad(fun, a, b, pts, quad_tol, what):
    pts = sorted(p for p in pts if a < p < b)
    val, err = integrate.quad(fun, a, b, points=pts or None, epsabs=quad_tol / 4,
                              epsrel=0.0, limit=400)
    if err > quad_tol:
        raise ConvergenceError(f"{what}: quadrature error {err:.2e} above {quad_tol:.1e}",
                               stage=what)
    return val


def _quad_tail(fun, a, b, pts, quad_tol, what):
    """``int_a^b fun`` with ``mu = exp(s)`` when the range spans decades.

    Algebraic tails become exponentially decaying in ``s``, which adaptive
    quadrature handles without special care.
    """
    if b <= 100.0 * a:
        return _quad(fun, a, b, pts, quad_tol, what)
    if a <= 0.0:
        m = min(1.0, b)
        return _quad(fun, a, m, pts, quad_tol, what) + _quad_tail(fun, m, b, pts, quad_tol, what)
    lpts = [np.log(p) for p in pts if a < p < b]
    return _quad(lambda s: fun(np.exp(s)) * np.exp(s), np.log(a), np.log(b), lpts,
                 quad_tol, what)


def R_f(f, x, quad_tol=1e-9):
    """``int_0^inf dmu/mu [f(mu x) - chi_[0,1](mu)]`` by adaptive quadrature."""
    if not f.rho > 0:
        raise ContractError("R_f needs rho > 0")
    x, n = _ray(f, x)
    mu_a = f.gauge_plateau / n
    pts = [k / n for k in f.kinks]

    def g(mu):
        return float(f.evaluate(mu * x))

    total = 0.0
    if mu_a < 1.0:
        total += _quad(lambda mu: (g(mu) - 1.0) / mu, mu_a, 1.0, pts, quad_tol, "R_f")
    upper, _ = _tail_cut(f, n, quad_tol, 0.0)
    if upper > 1.0:
        total += _quad_tail(lambda mu: g(mu) / mu, 1.0, upper, pts, quad_tol, "R_f")
    return total


def R_f_grad(f, x, quad_tol=1e-9):
    """``int_0^inf grad f(mu x) dmu`` componentwise."""
    if f.gradient is None:
        raise ContractError(
            f"{f.name} has no gradient; for radial f use the closed form -x/|x|^2")
    x, n = _ray(f, x)
    lo = f.gauge_plateau / n
    upper, _ = _tail_cut(f, n, quad_tol, 1.0)
    pts = sorted(k / n for k in f.kinks if lo < k / n < upper)
    edges = [lo] + pts + [upper]
    out = np.zeros(f.dim)
    for a, b in zip(edges[:-1], edges[1:]):
        if b > 100.0 * a > 0:
            val, err = integrate.quad_vec(lambda s: f.gradient(np.exp(s) * x) * np.exp(s),
                                          np.log(a), np.log(b), epsabs=quad_tol / 4,
                                          epsrel=0.0, limit=400)
        else:
            val, err = integrate.quad_vec(lambda mu: f.gradient(mu * x), a, b,
                                          epsabs=quad_tol / 4, epsrel=0.0, limit=400)
        if err > quad_tol:
            raise ConvergenceError(f"R_f_grad: quadrature error {err:.2e}", stage="R_f_grad")
        out += val
    return out


def F_f(f, x, quad_tol=1e-9):
    """``int_R f(mu x) dmu``; requires ``rho > 1``."""
    if not f.rho > 1:
        raise ContractError(f"F_f needs rho > 1 for integrability, got rho = {f.rho}")
    x, n = _ray(f, x)
    mu_a = f.gauge_plateau / n
    upper, _ = _tail_cut(f, n, quad_tol, -1.0)
    pts = [k / n for k in f.kinks]

    def g(mu):
        return float(f.evaluate(mu * x) + f.evaluate(-mu * x))

    total = 2.0 * mu_a
    if upper > mu_a:
        total += _quad_tail(g, mu_a, upper, pts, quad_tol, "F_f")
    return total


def R_f_trapezoid(f, x, n_nodes=400001, log_span=(-20.0, 20.0)):
    """Brute-force oracle for R_f: composite trapezoid rule in ``s = log mu``.

    The two pieces ``s < 0`` and ``s > 0`` are integrated separately so that
    each integrand is continuous for smooth ``f``.  Independent of the adaptive
    path and used only to cross-check it.
    """
    x, n = _ray(f, x)
    lo, hi = log_span
    if f.gauge_support is not None:
        hi = min(hi, np.log(f.gauge_support / n) + 1e-3) if f.gauge_support / n > 1 else 0.0
    s_in = np.linspace(lo, 0.0, n_nodes)
    s_out = np.linspace(0.0, max(hi, 0.0), n_nodes)
    head = f.evaluate(np.exp(s_in)[:, None] * x) - 1.0
    tail = f.evaluate(np.exp(s_out)[:, None] * x)
    return float(integrate.trapezoid(head, s_in) + integrate.trapezoid(tail, s_out))
