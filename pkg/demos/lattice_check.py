"""Compare the closed-form spectrum with wavepacket runs on a lattice.

Run:  python3 demos/lattice_check.py     (about 20 s)
"""
import math

from usc_waveguide import (SystemParams, build_lattice, emitter_decay_rate, oracle_scatter,
                           reflection_transmission, solve_amplitudes)

p = SystemParams(delta=2.0, lambda1=0.1, lambda2=0.1, theta=math.pi / 6,
                 g=0.05, gamma_wg=0.005, tau_d=0.0)

rate = emitter_decay_rate(build_lattice(p, 1.0))
print(f"bare emitter decay on the lattice {rate:.6f}, expected {2 * p.self_energy_rate:.6f}")
print(f"{'omega':>7} {'R lattice':>11} {'R closed':>11} {'residual':>9}")
for w in (0.98, 1.5, 1.98, 2.004):
    res = oracle_scatter(build_lattice(p, w))
    R, _ = reflection_transmission(solve_amplitudes(p, w))
    print(f"{w:7.3f} {res.R:11.3e} {R:11.3e} {res.residual:9.1e}")
