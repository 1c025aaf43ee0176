"""Reflection spectrum, level anticrossing and bare-state populations.

Run:  python3 demos/spectrum_tour.py [outdir]
Needs matplotlib (pip install -e .[demos]).
"""
import math
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from usc_waveguide import SystemParams, find_anticrossing, find_peaks, sweep_levels, sweep_spectrum

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)

p = SystemParams(delta=2.0, lambda1=0.1, lambda2=0.1, theta=math.pi / 6,
                 g=0.05, gamma_wg=0.005, tau_d=0.0)

# spectrum with and without the qubit-cavity coupling
coupled = sweep_spectrum(p, (0.9, 2.1), 2400, refine_poles=True)
bare = sweep_spectrum(p.replace(lambda1=0.0, lambda2=0.0), (0.9, 2.1), 2400)
for om, r, _ in find_peaks(coupled.omega[coupled.valid], coupled.R[coupled.valid]):
    print(f"peak at omega = {om:.5f}, R = {r:.4f}")

fig, ax = plt.subplots(figsize=(7, 3.5))
ax.plot(coupled.omega, coupled.R, label="coupled")
ax.plot(bare.omega, bare.R, "--", label="uncoupled")
ax.set_xlabel(r"$\omega/\omega_q$")
ax.set_ylabel("R")
ax.legend()
fig.tight_layout()
fig.savefig(out / "reflection.png", dpi=150)

# levels versus cavity frequency, with and without counter-rotating terms
fig, ax = plt.subplots(figsize=(7, 4))
for cr, style in ((True, "-"), (False, ":")):
    curves = sweep_levels(p, (1.2, 2.8), 401, counter_rotating=cr)
    ax.plot(curves.delta_grid, curves.energies - curves.energies[:, :1], style, lw=0.8)
ac = find_anticrossing(sweep_levels(p), "gg10", "ee00")
print(f"anticrossing at delta = {ac.delta_star:.5f}, gap = {ac.gap:.3e}")
ax.set_ylim(0, 4)
ax.set_xlabel(r"$\delta/\omega_q$")
ax.set_ylabel("excitation energy")
fig.tight_layout()
fig.savefig(out / "levels.png", dpi=150)

# where the photon goes: populations near the upper resonances
fig, ax = plt.subplots(figsize=(7, 3.5))
sel = (coupled.omega > 1.95) & (coupled.omega < 2.03)
for key in ("ee00", "gg10", "eg00", "ge00"):
    ax.plot(coupled.omega[sel], coupled.pops[key][sel], label=key)
ax.set_xlabel(r"$\omega/\omega_q$")
ax.set_ylabel("population")
ax.legend()
fig.tight_layout()
fig.savefig(out / "populations.png", dpi=150)
print(f"figures in {out}/")
