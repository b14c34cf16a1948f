"""
Radial averages of localization functions
=========================================

``R_f(x) = int_0^inf [f(mu x) - chi_[0,1](mu)] dmu / mu`` and
``F_f(x) = int f(mu x) dmu`` are homogeneous of degree zero up to a
logarithm and of degree minus one.  Here they are drawn along a ray for
three choices of ``f``, together with the reference slopes.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from timedelay.localization import (F_f, R_f, make_characteristic, make_plateau_bump,
                                    make_plateau_power)

out = os.environ.get("GALLERY_OUT", "gallery_output")
os.makedirs(out, exist_ok=True)

fs = [make_characteristic([-1.0, 1.0]), make_plateau_bump(1, 0.5, 1.0),
      make_plateau_power(1, 1.0, 2.0)]
t = np.geomspace(0.1, 10, 41)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
for f in fs:
    R = np.array([R_f(f, ti) for ti in t])
    F = np.array([F_f(f, ti) for ti in t])
    # R_f(t) + ln t and t F_f(t) must be constant
    print(f"{f.name:28s} spread of R_f + ln t: {np.ptp(R + np.log(t)):.1e}, "
          f"of t F_f: {np.ptp(t * F):.1e}")
    ax1.semilogx(t, R, label=f.name)
    ax2.loglog(t, F, label=f.name)
ax1.set_xlabel("t")
ax1.set_ylabel("R_f(t)")
ax2.set_xlabel("t")
ax2.set_ylabel("F_f(t)")
ax1.legend(fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(out, "localization_averages.png"), dpi=100)
