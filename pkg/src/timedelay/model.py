"""Finite-rank Friedrichs models ``H = Q + sum_j lambda_j |v_j><v_j|``.

Profiles carry analytic evaluators for ``v`` and ``v'``.  When a closed form
of the boundary value ``<v_j, (Q - z)^{-1} v_k>`` is known it is attached as
``resolvent``; it serves only as a test oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import wofz

from .exceptions import ContractError
from .grid import hermite_values

__all__ = [
    "Profile", "RankOnePotential", "FriedrichsModel", "lorentzian", "hermite",
    "hermite_combination", "custom_profile", "shifted_zero_profile",
    "lorentzian_resolvent", "hermite_resolvent",
]


@dataclass(frozen=True)
class Profile:
    """Analytic description of a vector ``v`` in L^2(R).

    ``sobolev_order`` is a trusted declaration of the smoothness of ``v``.
    ``derivatives`` optionally lists higher derivatives ``v'', v''', ...``.
    """

    name: str
    v: Callable
    v_prime: Callable
    sobolev_order: float = np.inf
    derivatives: tuple = ()
    params: dict = field(default_factory=dict)

    def __call__(self, y):
        return self.v(np.asarray(y, dtype=float))

    def derivative(self, order, y):
        if order == 0:
            return self.v(y)
        if order == 1:
            return self.v_prime(y)
        if order - 2 < len(self.derivatives):
            return self.derivatives[order - 2](y)
        raise ContractError(f"profile {self.name} has no derivative of order {order}")

    def shifted(self, c):
        """Profile ``y -> v(y - c)``."""
        v, vp = self.v, self.v_prime
        ders = tuple((lambda d: (lambda y: d(np.asarray(y) - c)))(d) for d in self.derivatives)
        return Profile(f"{self.name}(shift {c:g})", lambda y: v(np.asarray(y) - c),
                       lambda y: vp(np.asarray(y) - c), self.sobolev_order, ders,
                       dict(self.params, shift=c))


def lorentzian(n=0):
    """Rational orthonormal profile ``(y - i)^n / (sqrt(pi) (y + i)^(n+1))``.

    ``|v_n(y)|^2 = 1 / (pi (1 + y^2))`` for every ``n`` and the family is
    orthonormal.  ``n = 0`` gives the basic Lorentzian profile.
    """
    n = int(n)
    if n < 0:
        raise ContractError("order must be non-negative")
    c = 1.0 / np.sqrt(np.pi)

    def v(y):
        y = np.asarray(y, dtype=float)
        return c * (y - 1j) ** n / (y + 1j) ** (n + 1)

    def vp(y):
        y = np.asarray(y, dtype=float)
        return v(y) * (n / (y - 1j) - (n + 1) / (y + 1j))

    def vpp(y):
        y = np.asarray(y, dtype=float)
        a = n / (y - 1j) - (n + 1) / (y + 1j)
        return v(y) * (a**2 - n / (y - 1j) ** 2 + (n + 1) / (y + 1j) ** 2)

    return Profile(f"lorentzian{n}", v, vp, np.inf, (vpp,), {"kind": "lorentzian", "n": n})


def lorentzian_resolvent(j, k, z):
    """Closed form of ``<v_j, (Q - z)^{-1} v_k>`` for ``Im z > 0``."""
    z = np.asarray(z, dtype=complex)
    m = k - j
    if m == 0:
        return -1.0 / (z + 1j)
    if m > 0:
        return 2j * (z - 1j) ** (m - 1) / (z + 1j) ** (m + 1)
    return np.zeros_like(z)


def hermite(n=0):
    """Normalized Hermite function of order ``n``."""
    n = int(n)

    def v(y):
        return hermite_values(n, y).astype(complex)

    def vp(y):
        out = -np.sqrt((n + 1) / 2.0) * hermite_values(n + 1, y)
        if n > 0:
            out = out + np.sqrt(n / 2.0) * hermite_values(n - 1, y)
        return out.astype(complex)

    def vpp(y):
        y = np.asarray(y, dtype=float)
        return ((y**2 - 2 * n - 1) * hermite_values(n, y)).astype(complex)

    return Profile(f"hermite{n}", v, vp, np.inf, (vpp,), {"kind": "hermite", "n": n})


def hermite_resolvent(z):
    """``<h_0, (Q - z)^{-1} h_0> = i sqrt(pi) w(z)`` for ``Im z > 0`` (Faddeeva ``w``)."""
    return 1j * np.sqrt(np.pi) * wofz(np.asarray(z, dtype=complex))


def hermite_combination(coeffs):
    """Normalized ``sum_n c_n h_n``."""
    c = np.asarray(coeffs, dtype=complex)
    c = c / np.linalg.norm(c)
    parts = [hermite(n) for n in range(len(c))]

    def v(y):
        return sum(cn * p.v(y) for cn, p in zip(c, parts) if cn != 0)

    def vp(y):
        return sum(cn * p.v_prime(y) for cn, p in zip(c, parts) if cn != 0)

    def vpp(y):
        return sum(cn * p.derivatives[0](y) for cn, p in zip(c, parts) if cn != 0)

    return Profile("hermite_combination", v, vp, np.inf, (vpp,),
                   {"kind": "hermite_combination", "coeffs": c.tolist()})


def shifted_zero_profile(a):
    """Normalized ``(y - a) exp(-y^2/2)``; vanishes at ``y = a``.

    With ``lambda = (1/2 + a^2) / a`` the model ``Q + lambda |v><v|`` has an
    eigenvalue embedded at ``x = a``.
    """
    a = float(a)
    return hermite_combination([-a * np.sqrt(2.0), 1.0])


def custom_profile(v, v_prime, sobolev_order, name="custom"):
    """User profile; ``sobolev_order`` is recorded as a trusted declaration."""
    return Profile(name, v, v_prime, float(sobolev_order), (), {"kind": "custom"})


@dataclass(frozen=True)
class RankOnePotential:
    """Term ``coupling * |v><v|`` of a finite-rank potential."""

    coupling: float
    profile: Profile

    @property
    def sobolev_order(self):
        return self.profile.sobolev_order


@dataclass(frozen=True)
class FriedrichsModel:
    """``H = Q + sum_j lambda_j |v_j><v_j|`` with orthonormal ``v_j``."""

    potentials: Sequence[RankOnePotential] = ()

    def __post_init__(self):
        object.__setattr__(self, "potentials", tuple(self.potentials))

    @classmethod
    def from_profiles(cls, profiles, couplings):
        if len(profiles) != len(couplings):
            raise ContractError("one coupling per profile is required")
        return cls(tuple(RankOnePotential(float(c), p) for p, c in zip(profiles, couplings)))

    @property
    def rank(self):
        return len(self.potentials)

    @property
    def couplings(self):
        return np.array([p.coupling for p in self.potentials], dtype=float)

    @property
    def profiles(self):
        return tuple(p.profile for p in self.potentials)

    @property
    def is_trivial(self):
        return self.rank == 0 or not np.any(self.couplings)

    @property
    def sobolev_order(self):
        return min((p.sobolev_order for p in self.potentials), default=np.inf)

    def values(self, y):
        """Array of shape ``(N,) + y.shape`` with ``v_j(y)``."""
        y = np.asarray(y, dtype=float)
        if self.rank == 0:
            return np.zeros((0,) + y.shape, dtype=complex)
        return np.stack([np.asarray(p.v(y), dtype=complex) * np.ones(y.shape)
                         for p in self.profiles])

    def derivatives(self, y):
        y = np.asarray(y, dtype=float)
        if self.rank == 0:
            return np.zeros((0,) + y.shape, dtype=complex)
        return np.stack([np.asarray(p.v_prime(y), dtype=complex) * np.ones(y.shape)
                         for p in self.profiles])

    def gram(self, grid=None, exterior=True):
        """Gram matrix ``<v_j, v_k>``.

        On a grid the interior part uses the trapezoid rule on the box and the
        exterior ``|y|`` beyond the box is added by adaptive quadrature.
        Without a grid the full line is integrated adaptively.
        """
        n = self.rank
        G = np.zeros((n, n), dtype=complex)
        if grid is None:
            for j in range(n):
                for k in range(j, n):
                    G[j, k] = _line_integral(self.profiles[j], self.profiles[k], -np.inf, np.inf)
                    G[k, j] = np.conj(G[j, k])
            return G
        x = grid.x
        W = self.values(x)
        G = (W.conj() @ W.T) * grid.dx
        ends = self.values(np.array([grid.x_min, grid.x_max]))
        G += 0.5 * grid.dx * (np.outer(ends[:, 1].conj(), ends[:, 1])
                              - np.outer(ends[:, 0].conj(), ends[:, 0]))
        if exterior:
            for j in range(n):
                for k in range(n):
                    G[j, k] += (_line_integral(self.profiles[j], self.profiles[k], -np.inf, grid.x_min)
                                + _line_integral(self.profiles[j], self.profiles[k], grid.x_max, np.inf))
        return G

    def check_orthonormal(self, grid=None, tol=1e-8):
        """Return ``max |G - I|``; raise if above ``tol``."""
        err = float(np.max(np.abs(self.gram(grid) - np.eye(self.rank)), initial=0.0))
        if err > tol:
            raise ContractError(f"profiles are not orthonormal: max |G - I| = {err:.3e}")
        return err


def _line_integral(p, q, a, b):
    def re(y):
        return float(np.real(np.conj(p.v(np.array(y))) * q.v(np.array(y))))

    def im(y):
        return float(np.imag(np.conj(p.v(np.array(y))) * q.v(np.array(y))))

    kw = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
    return integrate.quad(re, a, b, **kw)[0] + 1j * integrate.quad(im, a, b, **kw)[0]
