"""Unequal couplings open the dark state: Fano dips and antisymmetric peaks.

Run:  python3 demos/dark_state_series.py [outdir]
"""
import math
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from usc_waveguide import SystemParams, density_map, fit_fano, sweep_spectrum
from usc_waveguide.scattering import narrowest_resonance, zoom_window

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)
base = SystemParams(delta=2.0, lambda1=0.1, lambda2=0.1, theta=math.pi / 6,
                    g=0.05, gamma_wg=0.005, tau_d=0.0)

fig, (ax_r, ax_p) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
for l2 in (0.1, 0.15, 0.2, 0.25):
    p = base.replace(lambda2=l2)
    t = sweep_spectrum(p, (0.97, 1.02), 2001, refine_poles=True)
    ax_r.plot(t.omega, t.R, label=f"$\\lambda_2$={l2}")
    ax_p.plot(t.omega, t.pops["antisym"])
    if l2 != 0.1:
        win = zoom_window(narrowest_resonance(p, (0.9, 1.1)), 20.0)
        z = sweep_spectrum(p, win, 801)
        f = fit_fano(z.omega[z.valid], z.R[z.valid])
        print(f"lambda2={l2}: Fano omega0={f.omega0:.5f} q={f.q:.2f} width={f.width:.2e}, "
              f"antisym peak {np.nanmax(t.pops['antisym']):.3f}")
ax_r.set_ylabel("R")
ax_r.legend()
ax_p.set_ylabel("antisymmetric population")
ax_p.set_xlabel(r"$\omega/\omega_q$")
fig.tight_layout()
fig.savefig(out / "dark_series.png", dpi=150)

# reflection map near the bare qubit frequency
fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
for ax, l2 in zip(axes, (0.1, 0.2)):
    dm = density_map(base.replace(lambda2=l2), (0.99, 1.01), (1.5, 2.5), 401, 101)
    im = ax.pcolormesh(dm.omega, dm.delta, dm.R, shading="auto", vmin=0, vmax=1)
    ax.set_title(f"$\\lambda_2$={l2}")
    ax.set_xlabel(r"$\omega/\omega_q$")
axes[0].set_ylabel(r"$\delta/\omega_q$")
fig.colorbar(im, ax=axes, label="R")
fig.savefig(out / "dark_map.png", dpi=150)
print(f"figures in {out}/")
