"""
Probing the auxiliary absolute-value problem
============================================

-Δu + u = lam |u^+ - phi1| with zero flux.  Neither 0 nor phi1 solves it, but
since phi1 is constant the equation collapses to u = lam |u - k| on constants,
and u = lam k / (1 + lam) is an exact solution.  A multistart Newton probe
finds nothing else.
"""

import numpy as np

from gmsteady import build_grid, check_l9_nonexistence, check_p0_nonexistence

lam = 0.5
grid = build_grid(1, (0.0, 1.0), 65)
rep = check_l9_nonexistence(lam=lam, n_starts=100, grid=grid)
print(f"residual at 0: {rep.residual_zero}   residual at phi1: {rep.residual_phi1}")
print(f"{rep.n_converged} of {rep.n_starts} starts converged, {len(rep.roots)} distinct root(s)")
for r in rep.roots:
    print(f"  root: min={r.min():.15f} max={r.max():.15f}  (lam/(1+lam) = {lam / (1 + lam):.15f})")

# the t = 0 end of the absolute-value homotopy has the same constant root
p0 = check_p0_nonexistence(lam, n_starts=50, grid=grid)
print(f"t=0 problem: {p0.n_converged} of {p0.n_starts} starts converged")
print("distinct roots:", [float(np.round(r.mean(), 12)) for r in p0.roots])
