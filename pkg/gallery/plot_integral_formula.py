"""
The integral formula for h(P) = P^2
===================================

For a free Schroedinger evolution the antisymmetrized sojourn integral

    int_0^inf <phi, [e^{itH0} f(Q/r) e^{-itH0} - e^{-itH0} f(Q/r) e^{itH0}] phi> dt

tends to ``<phi, A_f phi>`` with ``A_f = Q g(P) + g(P) Q`` and, for radial
``f``, ``g(p) = -1/h'(p)``.  The state must keep its energies away from the
critical value ``h = 0``.
"""
import numpy as np
from scipy import integrate

from timedelay.dispersion import builtin
from timedelay.grid import Grid, gaussian
from timedelay.localization import make_characteristic, make_plateau_bump
from timedelay.sojourn import SojournConfig, a_f_expectation, integral_formula_lhs

grid = Grid.centered(16384, 800.0)
x0, w, k0 = 3.0, 4.0, 2.0
phi = gaussian(grid, x0, w, k0)
h = builtin("schroedinger")
f = make_plateau_bump(1, 0.5, 1.0)

a_f = a_f_expectation(phi, h, f)

# independent check: <A_f> = -x0 <1/p> for this packet
s = 1 / (w * np.sqrt(2))
dens = lambda k: np.exp(-(k - k0) ** 2 / (2 * s * s)) / (np.sqrt(2 * np.pi) * s)
oracle = -x0 * integrate.quad(lambda k: dens(k) / k, 0.05, 10, epsabs=1e-15, points=[k0])[0]
print(f"<A_f> on the grid {a_f:.12f}, by quadrature {oracle:.12f}")

cfg = SojournConfig(t_cutoff_factor=0.6, t_margin=15.0, sample_stride=5)
rs = [4.0, 8.0, 16.0, 32.0, 64.0]
for r, v in zip(rs, integral_formula_lhs(phi, h, f, rs, cfg)):
    print(f"r = {r:4.0f}: LHS = {v:.12f}, relative error {abs(v - a_f) / abs(a_f):.1e}")

# Exploratory: the same comparison for the discontinuous f = chi_[-1,1].
# Convergence is observed here, not guaranteed by any result in this package.
chi = make_characteristic([-1.0, 1.0])
a_chi = a_f_expectation(phi, h, chi)
for r, v in zip(rs, integral_formula_lhs(phi, h, chi, rs, cfg)):
    print(f"[exploratory, chi] r = {r:4.0f}: LHS = {v:.12f}, "
          f"relative error {abs(v - a_chi) / abs(a_chi):.1e}")
