"""Dispersion relations h(p) for free Hamiltonians H0 = h(P)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erfc

from .exceptions import ContractError
from .grid import as_momentum, as_position, momentum_density

__all__ = [
    "DispersionRelation", "EnergyWindow", "builtin", "from_table", "linear",
    "admissible", "check_derivatives", "gaussian_window_mass", "project_to_window",
]


@dataclass(frozen=True)
class DispersionRelation:
    """Symbol ``h`` with derivatives and its critical values.

    ``margin_factor`` scales admissibility margins; it is 10 for tabulated
    symbols whose derivatives come from a spline.
    """

    name: str
    h: Callable
    h_prime: Callable
    h_second: Callable
    critical_values: tuple = ()
    critical_points: tuple = ()
    margin_factor: float = 1.0

    def __call__(self, p):
        return self.h(p)

    def distance_to_critical(self, lo, hi):
        """Distance from the interval ``[lo, hi]`` to the critical set (inf if empty)."""
        d = np.inf
        for c in self.critical_values:
            if lo <= c <= hi:
                return 0.0
            d = min(d, lo - c if c < lo else c - hi)
        return d


def linear(v0=0.0, v=1.0):
    v0, v = float(v0), float(v)
    if v == 0.0:
        raise ContractError("linear dispersion needs nonzero velocity")
    return DispersionRelation(
        name=f"linear({v0:g},{v:g})",
        h=lambda p: v0 + v * np.asarray(p, dtype=float),
        h_prime=lambda p: np.full(np.shape(p), v),
        h_second=lambda p: np.zeros(np.shape(p)),
    )


def _schroedinger():
    return DispersionRelation(
        name="schroedinger",
        h=lambda p: np.asarray(p, dtype=float) ** 2,
        h_prime=lambda p: 2.0 * np.asarray(p, dtype=float),
        h_second=lambda p: np.full(np.shape(p), 2.0),
        critical_values=(0.0,),
        critical_points=(0.0,),
    )


def _sqrt_klein_gordon():
    def h(p):
        return np.sqrt(1.0 + np.asarray(p, dtype=float) ** 2)

    return DispersionRelation(
        name="sqrt_klein_gordon",
        h=h,
        h_prime=lambda p: np.asarray(p, dtype=float) / h(p),
        h_second=lambda p: h(p) ** -3,
        critical_values=(1.0,),
        critical_points=(0.0,),
    )


def builtin(name, **params):
    """Built-in symbol by name.

    ``"linear"`` takes keyword arguments ``v0`` and ``v``; the string form
    ``"linear(v0, v)"`` is also accepted.
    """
    key = name.strip().lower()
    if key.startswith("linear"):
        if "(" in key:
            args = key[key.index("(") + 1:key.rindex(")")].split(",")
            if len(args) != 2:
                raise ContractError(f"cannot parse {name!r}; expected linear(v0, v)")
            return linear(float(args[0]), float(args[1]))
        return linear(params.get("v0", 0.0), params.get("v", 1.0))
    if key in ("schroedinger", "schrodinger", "p2"):
        return _schroedinger()
    if key in ("sqrt_klein_gordon", "klein_gordon"):
        return _sqrt_klein_gordon()
    raise ContractError(f"unknown dispersion relation {name!r}")


def from_table(p, h_values, name="table"):
    """Symbol from samples on an increasing momentum grid.

    Derivatives come from a cubic spline; critical points are the real roots of
    the spline derivative.
    """
    p = np.asarray(p, dtype=float)
    spl = CubicSpline(p, np.asarray(h_values, dtype=float))
    d1, d2 = spl.derivative(1), spl.derivative(2)
    roots = np.asarray(d1.roots(extrapolate=False))
    return DispersionRelation(
        name=name,
        h=lambda q: spl(q),
        h_prime=lambda q: d1(q),
        h_second=lambda q: d2(q),
        critical_values=tuple(float(spl(r)) for r in roots),
        critical_points=tuple(float(r) for r in roots),
        margin_factor=10.0,
    )


@dataclass(frozen=True)
class EnergyWindow:
    """Closed energy interval ``[lo, hi]`` kept ``margin`` away from critical values."""

    lo: float
    hi: float
    margin: float = 1e-3

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ContractError("energy window needs lo < hi")
        if not self.margin > 0:
            raise ContractError("energy window margin must be positive")

    def validate(self, h):
        d = h.distance_to_critical(self.lo, self.hi)
        need = self.margin * h.margin_factor
        if d < need:
            raise ContractError(
                f"energy window [{self.lo:g}, {self.hi:g}] is within {d:.3g} of the "
                f"critical set {list(h.critical_values)} of {h.name} (margin {need:.3g})")
        return self


def admissible(phi, h, window, mass_tol=1e-10, pad=2):
    """True if the momentum mass of ``phi`` on ``{p : h(p) outside window}`` is small."""
    window.validate(h)
    k, dens, dk = momentum_density(phi, pad)
    e = h(k)
    outside = (e < window.lo) | (e > window.hi)
    total = dens.sum()
    return bool(dens[outside].sum() <= mass_tol * total)


def project_to_window(phi, h, window):
    """Apply the indicator of ``h(p)`` in ``[lo, hi]`` in momentum representation.

    The result is exactly admissible on the grid.
    """
    window.validate(h)
    pk = as_momentum(phi)
    e = h.h(pk.grid.k)
    keep = (e >= window.lo) & (e <= window.hi)
    out = pk.replace(np.where(keep, pk.samples, 0.0))
    return out if phi.representation is pk.representation else as_position(out)


def gaussian_window_mass(k0, sigma_k, p_lo, p_hi):
    """Mass of a normal momentum density outside ``[p_lo, p_hi]``."""
    s = np.sqrt(2.0) * sigma_k
    return 0.5 * erfc((k0 - p_lo) / s) + 0.5 * erfc((p_hi - k0) / s)


def check_derivatives(h, window, delta=1e-4, n_samples=201):
    """Max deviation of centred differences of ``h`` from ``h'`` and ``h''``."""
    p = np.linspace(window[0], window[1], n_samples)
    fd1 = (h.h(p + delta) - h.h(p - delta)) / (2 * delta)
    fd2 = (h.h_prime(p + delta) - h.h_prime(p - delta)) / (2 * delta)
    return float(max(np.max(np.abs(fd1 - h.h_prime(p))), np.max(np.abs(fd2 - h.h_second(p)))))
