"""Uniform periodic grids and wavefunctions sampled on them.

The continuous Fourier transform is approximated by

    phi_hat(k_m) = dx / sqrt(2 pi) * sum_j phi(x_j) exp(-i k_m x_j),

with ``x_j = x_min + j dx`` and ``k_m = (m - n/2) dk``.  With this scaling the
discrete transform is unitary between the weighted inner products
``sum conj(a) b dx`` and ``sum conj(a) b dk``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import BoxOverflowError, ContractError, SingularSymbolError

__all__ = [
    "Grid", "Representation", "WaveFunction", "to_momentum", "to_position",
    "inner", "norm", "mixed_expectation", "check_interior", "gaussian",
    "hermite_function", "hermite_values", "from_samples", "position_density",
    "momentum_density", "as_position", "as_momentum", "apply_symbol",
]

_SQRT2PI = np.sqrt(2.0 * np.pi)


class Representation(enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[x_min, x_max)`` with ``n_points`` samples.

    Parameters
    ----------
    n_points : int
        Number of samples, a power of two.
    x_min, x_max : float
        Box endpoints. The box is periodic with length ``x_max - x_min``.
    """

    n_points: int
    x_min: float
    x_max: float

    def __post_init__(self):
        n = int(self.n_points)
        if n < 2 or n & (n - 1):
            raise ContractError(f"n_points must be a power of two, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ContractError("x_max must exceed x_min")
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))

    @property
    def length(self):
        return self.x_max - self.x_min

    @property
    def dx(self):
        return self.length / self.n_points

    @property
    def dk(self):
        return 2.0 * np.pi / (self.n_points * self.dx)

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self):
        return self.dk * (np.arange(self.n_points) - self.n_points // 2)

    @property
    def k_max(self):
        """Nyquist momentum ``pi/dx``."""
        return np.pi / self.dx

    @classmethod
    def centered(cls, n_points, half_width):
        """Grid on ``[-half_width, half_width)``."""
        return cls(n_points, -half_width, half_width)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Immutable complex samples of a state in one representation."""

    grid: Grid
    samples: np.ndarray
    representation: Representation = Representation.POSITION

    def __post_init__(self):
        a = np.array(self.samples, dtype=complex)
        if a.shape != (self.grid.n_points,):
            raise ContractError(
                f"samples must have shape ({self.grid.n_points},), got {a.shape}")
        a.flags.writeable = False
        object.__setattr__(self, "samples", a)
        object.__setattr__(self, "representation", Representation(self.representation))

    @property
    def spacing(self):
        if self.representation is Representation.POSITION:
            return self.grid.dx
        return self.grid.dk

    @property
    def nodes(self):
        if self.representation is Representation.POSITION:
            return self.grid.x
        return self.grid.k

    def norm(self):
        return norm(self)

    def replace(self, samples):
        """New state on the same grid and representation."""
        return WaveFunction(self.grid, samples, self.representation)

    def __mul__(self, c):
        return self.replace(self.samples * c)

    __rmul__ = __mul__

    def __add__(self, other):
        _check_compatible(self, other)
        return self.replace(self.samples + other.samples)

    def __sub__(self, other):
        _check_compatible(self, other)
        return self.replace(self.samples - other.samples)


def _check_compatible(a, b):
    if a.grid != b.grid:
        raise ContractError("states live on different grids")
    if a.representation is not b.representation:
        raise ContractError("states are in different representations")


def _forward(samples, x0, dx, n_out=None):
    """Discrete transform onto ``k_m = (m - n/2) dk`` for ``n = n_out``."""
    n = len(samples) if n_out is None else n_out
    buf = np.zeros(n, dtype=complex)
    buf[:len(samples)] = samples
    dk = 2.0 * np.pi / (n * dx)
    k = dk * (np.arange(n) - n // 2)
    return np.fft.fftshift(np.fft.fft(buf)) * np.exp(-1j * k * x0) * (dx / _SQRT2PI)


def _backward(samples, x0, dx):
    n = len(samples)
    dk = 2.0 * np.pi / (n * dx)
    k = dk * (np.arange(n) - n // 2)
    return np.fft.ifft(np.fft.ifftshift(samples * np.exp(1j * k * x0))) * (n * dk / _SQRT2PI)


def to_momentum(phi):
    """Transform a position-representation state to momentum representation."""
    if phi.representation is not Representation.POSITION:
        raise ContractError("to_momentum expects a position-representation state")
    g = phi.grid
    return WaveFunction(g, _forward(phi.samples, g.x_min, g.dx), Representation.MOMENTUM)


def to_position(phi):
    """Transform a momentum-representation state to position representation."""
    if phi.representation is not Representation.MOMENTUM:
        raise ContractError("to_position expects a momentum-representation state")
    g = phi.grid
    return WaveFunction(g, _backward(phi.samples, g.x_min, g.dx), Representation.POSITION)


def as_position(phi):
    return phi if phi.representation is Representation.POSITION else to_position(phi)


def as_momentum(phi):
    return phi if phi.representation is Representation.MOMENTUM else to_momentum(phi)


def inner(phi, psi):
    """Scalar product, conjugate-linear in the first argument."""
    _check_compatible(phi, psi)
    return complex(np.vdot(phi.samples, psi.samples) * phi.spacing)


def norm(phi):
    return float(np.sqrt(np.vdot(phi.samples, phi.samples).real * phi.spacing))


def mixed_expectation(phi, g_momentum, apply_Q_after=True, rel_cutoff=1e-24):
    """Evaluate ``<phi, Q g(P) phi>`` or ``<phi, g(P) Q phi>``.

    ``g`` is applied as a multiplier in momentum representation and ``Q`` as
    multiplication by ``x`` in position representation.

    Parameters
    ----------
    phi : WaveFunction
    g_momentum : callable
        Real symbol ``g(p)``, vectorized.
    apply_Q_after : bool
        If true return ``<phi, Q g(P) phi>``, otherwise ``<phi, g(P) Q phi>``.
    rel_cutoff : float
        Momentum samples with ``|phi_hat|^2`` below ``rel_cutoff * max|phi_hat|^2``
        are treated as outside the support of ``phi``.

    Raises
    ------
    SingularSymbolError
        If ``g`` is not finite on the momentum support of ``phi``.
    """
    phi_k = as_momentum(phi)
    phi_x = as_position(phi)
    g = phi.grid
    if apply_Q_after:
        gphi = _apply_symbol(phi_k, g_momentum, rel_cutoff)
        return complex(np.vdot(phi_x.samples, g.x * gphi) * g.dx)
    # <phi, g(P) Q phi> = <conj(g)(P) phi, Q phi> for real g
    gphi = _apply_symbol(phi_k, g_momentum, rel_cutoff)
    return complex(np.vdot(gphi, g.x * phi_x.samples) * g.dx)


def _apply_symbol(phi_k, symbol, rel_cutoff):
    """Return position samples of ``symbol(P) phi`` (``phi_k`` in momentum rep)."""
    dens = np.abs(phi_k.samples) ** 2
    mask = dens > rel_cutoff * dens.max()
    k = phi_k.grid.k
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.asarray(symbol(k[mask]), dtype=complex)
    if not np.all(np.isfinite(vals)):
        bad = k[mask][~np.isfinite(vals)]
        raise SingularSymbolError(
            f"symbol not finite on the momentum support, e.g. at p = {bad[0]:.6g}")
    out = np.zeros_like(phi_k.samples)
    out[mask] = vals * phi_k.samples[mask]
    g = phi_k.grid
    return _backward(out, g.x_min, g.dx)


def apply_symbol(phi, symbol, rel_cutoff=1e-24):
    """``symbol(P) phi`` as a position-representation state."""
    return WaveFunction(phi.grid, _apply_symbol(as_momentum(phi), symbol, rel_cutoff))


def check_interior(phi, fraction=0.1, tol=1e-10, what="state"):
    """Raise if more than ``tol * |phi|^2`` mass sits in the outer edge bands.

    The check is made in the representation ``phi`` is carried in.
    """
    a = np.abs(phi.samples) ** 2
    n = len(a)
    m = max(1, int(round(fraction * n)))
    total = a.sum()
    if total == 0.0:
        return 0.0
    edge = (a[:m].sum() + a[n - m:].sum()) / total
    if edge > tol:
        raise BoxOverflowError(
            f"{what}: relative mass {edge:.3e} within {fraction:.0%} of the "
            f"{phi.representation.value} box edge exceeds {tol:.1e}")
    return float(edge)


def position_density(phi, pad=2):
    """Trigonometric interpolation of ``|phi(x)|^2`` on a ``pad``-times finer grid.

    Returns ``(x, density, spacing)``.
    """
    phi_k = as_momentum(phi)
    g = phi.grid
    n = g.n_points
    big = np.zeros(pad * n, dtype=complex)
    lo = (pad * n) // 2 - n // 2
    big[lo:lo + n] = phi_k.samples
    dxf = g.dx / pad
    vals = _backward(big, g.x_min, dxf)
    x = g.x_min + dxf * np.arange(pad * n)
    return x, np.abs(vals) ** 2, dxf


def momentum_density(phi, pad=2):
    """``|phi_hat(k)|^2`` sampled ``pad`` times finer (zero-extended box).

    The values are exact samples of the transform of the band-limited state.
    Returns ``(k, density, spacing)``.
    """
    phi_x = as_position(phi)
    g = phi.grid
    n = pad * g.n_points
    vals = _forward(phi_x.samples, g.x_min, g.dx, n_out=n)
    dkf = g.dk / pad
    k = dkf * (np.arange(n) - n // 2)
    return k, np.abs(vals) ** 2, dkf


def from_samples(grid, func, representation=Representation.POSITION):
    nodes = grid.x if Representation(representation) is Representation.POSITION else grid.k
    return WaveFunction(grid, func(nodes), representation)


def gaussian(grid, center=0.0, width=1.0, momentum=0.0):
    """Unit-normalized Gaussian packet.

    ``phi(x) = (pi w^2)^(-1/4) exp(-(x - x0)^2 / (2 w^2) + i k0 x)``; the momentum
    density then has standard deviation ``1/(w sqrt 2)``.
    """
    x = grid.x
    amp = (np.pi * width**2) ** -0.25
    return WaveFunction(grid, amp * np.exp(-(x - center) ** 2 / (2 * width**2) + 1j * momentum * x))


def hermite_function(grid, n, center=0.0):
    """Normalized Hermite function of order ``n`` by the stable recurrence."""
    return WaveFunction(grid, hermite_values(n, grid.x - center))


def hermite_values(n, y):
    y = np.asarray(y, dtype=float)
    h0 = np.pi**-0.25 * np.exp(-y**2 / 2)
    if n == 0:
        return h0
    h1 = np.sqrt(2.0) * y * h0
    for j in range(2, n + 1):
        h0, h1 = h1, np.sqrt(2.0 / j) * y * h1 - np.sqrt((j - 1.0) / j) * h0
    return h1
