"""
Wave operators and the scattering operator in time
==================================================

The Cook integrand ``|V exp(-i tau Q) phi|`` controls how fast
``exp(itH) exp(-itH0) phi`` settles.  With ``H0 = Q`` free evolution shifts
momentum, so the integrand is the Fourier transform of ``conj(v) phi``.  For
the Lorentzian that transform is one-sided, and the two time directions decay
very differently.  Both decay faster than any power.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from timedelay.grid import Grid, gaussian
from timedelay.model import FriedrichsModel, lorentzian
from timedelay.propagation import cook_decay, scatter_with_tails
from timedelay.stationary import s_matrix

out = os.environ.get("GALLERY_OUT", "gallery_output")
os.makedirs(out, exist_ok=True)

grid = Grid.centered(16384, 200.0)
phi = gaussian(grid, 0.0, 1.0, 0.0)
model = FriedrichsModel.from_profiles([lorentzian(0)], [1.0])

tau = np.geomspace(0.1, 40, 200)
fig, ax = plt.subplots(figsize=(6, 4))
ax.loglog(tau, cook_decay(phi, model, -tau), label="tau < 0")
ax.loglog(tau, cook_decay(phi, model, tau), label="tau > 0")
ax.loglog(tau, tau**-2.0, "k:", label="tau^-2")
ax.set_ylim(1e-18, 2)
ax.set_xlabel("|tau|")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(out, "cook_integrand.png"), dpi=100)

###############################################################################
# ``S phi`` from the dynamics should be ``S(x) phi(x)`` pointwise.

for dt in (0.02, 0.01, 0.005):
    res = scatter_with_tails(phi, model, 30.0, dt)
    sel = np.abs(phi.samples) > 0.05 * np.abs(phi.samples).max()
    err = np.max(np.abs(res.state.samples[sel] / phi.samples[sel]
                        - s_matrix(model, grid.x[sel])))
    print(f"dt = {dt:5.3f}: sup |S_dyn phi / phi - S| = {err:.1e}, Cook tails {res.tail_estimate:.1e}")
