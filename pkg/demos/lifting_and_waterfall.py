"""Minimum-phase Chebyshev design by lifting the 25-tap equiripple prototype.

The prototype's amplitude dips slightly below zero in the stopband, so
its Gramian is indefinite and no real minimum-phase factor exists. Adding
a constant to the centre tap fixes that. How much to add is the question
this script walks through.
"""
import numpy as np

from minphase import (
    FrequencyGrid,
    LinearPhasePrototype,
    amplitude_response,
    design_minphase,
    frequency_response_magnitude,
    measure_gamma_psd,
    waterfall_sweep,
    zeros,
)
from minphase.tapfile import load_fixture

g = LinearPhasePrototype(load_fixture("table2_g.txt"))

# %% the most negative ripple sets the minimum lift
gp = measure_gamma_psd(g)
print(f"prototype length {len(g)}, most negative amplitude {-gp:.15e}")

# %% sweep the lift across that value
offsets = [-1e-8, -1e-10, -1e-12, -1e-14, 1e-16, 1.16e-13, 1e-11, 1e-8, 1e-5, 1e-3]
print("\n   offset        E_L2    converged")
for p in waterfall_sweep(g, offsets, Q=250):
    print(f"{p.offset:+.2e}  {p.norm:.3e}  {p.converged}")
# Below gamma_psd the lag equations have no real root and the residual
# plateaus; above it the residual drops to rounding level.

# %% design just above the waterfall point
c, rep = design_minphase(g, Q=250, epsilon=1.16e-13)
print(f"\nE_L2 = {rep.residual.norm:.3e} after {rep.residual.iterations} steps, "
      f"scale s = {rep.scale:.6f}")
print("  k    c_approx               c")
for k, (a, b) in enumerate(zip(rep.c_approx.taps, c.taps)):
    print(f"{k:3d}  {a:+.15f}  {b:+.15f}")
print(f"largest zero modulus {np.max(np.abs(zeros(c))):.8f}")

# %% |C|^2 reproduces the lifted, scaled amplitude
w = FrequencyGrid().samples
err = frequency_response_magnitude(c, w) ** 2 - rep.scale * (amplitude_response(g, w) + rep.gamma_final)
print(f"max | |C|^2 - s(A + gamma) | = {np.max(np.abs(err)):.2e}")

# %% a generous lift also factors, but fills in the stopband
c_big, _ = design_minphase(g, Q=250, epsilon=1e-3)
stop = amplitude_response(g, w) < 1e-3
for name, taps in (("tight", c), ("loose", c_big)):
    floor = np.min(frequency_response_magnitude(taps, w[stop]) ** 2)
    print(f"{name} lift: stopband floor {10 * np.log10(floor):7.1f} dB, "
          f"max|z| {np.max(np.abs(zeros(taps))):.6f}")
