"""
Stationary scattering in a rank-one Friedrichs model
====================================================

``H = Q + lambda |v><v|`` with the Lorentzian profile
``v(y) = 1 / (sqrt(pi) (y + i))``.  The scattering matrix is a phase
``S(x)`` at each energy, and ``-i conj(S) S'`` is the Eisenbud-Wigner kernel.
For this profile both are known in closed form, which makes the model a
convenient test bed.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from timedelay.model import FriedrichsModel, lorentzian, shifted_zero_profile
from timedelay.stationary import detect_eigenvalues, ew_kernel, s_matrix

out = os.environ.get("GALLERY_OUT", "gallery_output")
os.makedirs(out, exist_ok=True)
x = np.linspace(-10, 10, 401)

###############################################################################
# The phase of S(x) winds once around the circle as x crosses the coupling.

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
for lam in (-2.0, 0.5, 1.0, 3.0):
    model = FriedrichsModel.from_profiles([lorentzian(0)], [lam])
    S = s_matrix(model, x)
    tr = ew_kernel(model, x)
    ax1.plot(x, np.unwrap(np.angle(S)), label=f"lambda = {lam:g}")
    ax2.plot(x, tr.ew_kernel, label=f"lambda = {lam:g}")
    exact = 2 / (1 + (x - lam) ** 2) - 2 / (1 + x**2)
    print(f"lambda = {lam:5.2f}: max |S| - 1 = {np.max(np.abs(np.abs(S) - 1)):.1e}, "
          f"kernel error = {np.max(np.abs(tr.ew_kernel - exact)):.1e}")
ax1.set_xlabel("x")
ax1.set_ylabel("arg S(x)")
ax2.set_xlabel("x")
ax2.set_ylabel("EW kernel")
ax1.legend(fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(out, "stationary_scattering.png"), dpi=100)

###############################################################################
# A profile vanishing at ``x = a`` embeds an eigenvalue there when the
# coupling is ``(1/2 + a^2) / a``.  The smallest singular value of
# ``I + B(x + i0) Lambda`` drops to zero, and the kernel is evaluated away
# from the detected point.

a = -1.0
model = FriedrichsModel.from_profiles([shifted_zero_profile(a)], [(0.5 + a * a) / a])
eig = detect_eigenvalues(model, (-3.0, 3.0))
print("embedded eigenvalues:", eig)
tr = ew_kernel(model, np.linspace(-3, 3, 301), eigenvalues=eig)
print(f"kernel kept on {tr.x_grid.size} of 301 points")
