"""Converting a random FIR to its minimum-phase equivalent.

The autocorrelation of any FIR is nonnegative on the unit circle, so no
lift is needed. Cholesky gives the factor and the all-pass matrix gives
an anti-causal prefilter f that turns h into c. An MMSE decision-feedback
design is shown alongside for comparison.
"""
import numpy as np

from minphase import (
    MmseConfig,
    build_allpass,
    energy_concentration,
    mmse_transform,
    transform,
    zeros,
)
from minphase.tapfile import rand10_seed42

h = rand10_seed42()
print("input zero moduli:", np.round(np.sort(np.abs(zeros(h))), 3))

r = transform(h)
print("output zero moduli:", np.round(np.sort(np.abs(zeros(r.c))), 3))
print(f"E_L2 = {r.residual.norm:.2e}, max ||C| - |H|| = {r.spectral_error:.2e}")

# %% energy arrives as early as possible
print("\n k   P_h(k)   P_c(k)")
for k, (a, b) in enumerate(zip(energy_concentration(h), energy_concentration(r.c))):
    print(f"{k:2d}  {a:7.4f}  {b:7.4f}")

# %% the prefilter: reversed f convolved with h is zero, then c
y = np.convolve(r.f_taps[::-1], h)
n = r.f_taps.size
print(f"\nprefilter length {n}, leakage before c {np.max(np.abs(y[:n - 1])):.1e}, "
      f"error on c {np.max(np.abs(y[n - 1:n + 9] - r.c.taps)):.1e}")

# %% it is all-pass: white noise keeps unit variance
F = build_allpass(h, 100)
x = np.random.default_rng(0).standard_normal(200_000)
print(f"variance through the symmetry row: {np.var(np.convolve(x, F.prefilter(), 'valid')):.4f}")

# %% the MMSE baseline trades noise bias against feedforward length:
# large sigma2 biases c, tiny sigma2 asks 100 taps to invert zeros at
# modulus 1.1 and truncation takes over
print("\n sigma2     MMSE E_L2")
for s2 in (1e-2, 1e-4, 1e-6):
    print(f"{s2:7.0e}  {mmse_transform(h, MmseConfig(100, s2)).residual.norm:.3e}")
