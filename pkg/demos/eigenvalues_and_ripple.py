"""The smallest Gramian eigenvalue tracks the negative ripple.

For a growing padding Q the banded Toeplitz Gramian's spectrum fills in
the amplitude response, so its smallest eigenvalue approaches the most
negative amplitude value from above.
"""
from minphase import LinearPhasePrototype, build_gramian, cholesky, measure_gamma_psd, min_eigenvalue
from minphase.gramian import NotPositiveDefinite
from minphase.tapfile import load_fixture

g = LinearPhasePrototype(load_fixture("table1_g.txt"))
gp = measure_gamma_psd(g)
print(f"-min A = {gp:.17g}")
print("   Q      lambda_min          gamma_psd - |lambda_min|")
for Q in (5, 10, 25, 50, 100, 250, 500, 1000, 2000):
    lam = min_eigenvalue(build_gramian(g, Q))
    print(f"{Q:5d}  {lam:+.15e}  {gp - abs(lam):.3e}")

# %% Cholesky notices the indefiniteness as soon as a pivot goes negative
for gamma in (0.0, gp - 1e-7, gp + 1e-12):
    try:
        cholesky(build_gramian(g, 500, gamma))
        print(f"lift {gamma:.6e}: factored")
    except NotPositiveDefinite as exc:
        print(f"lift {gamma:.6e}: pivot {exc.index} is {exc.pivot:.3e}")
