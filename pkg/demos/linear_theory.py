"""
Linear waves, the ill-posed band and critical dissipation
=========================================================

Rest-state dispersion of the 1D system, where the cutoff sits and how much
fourth-order dissipation is needed to remove every growing mode.
"""

import numpy as np

from bkbk.model1d import (Params1D, critical_nu, critical_wavenumber, dispersion_omega,
                          max_growth_rate)

# Rest state eta0 = 1 with g = 1: long waves travel at sqrt(g eta0) = 1.
p = Params1D(kappa=0.5, g=1.0, eta0=1.0)
k = np.array([0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
wp, _ = dispersion_omega(k, p)
print(" k      Re omega+   Im omega+")
for kk, w in zip(k, wp):
    print(f"{kk:4.1f}  {w.real:10.5f}  {w.imag:10.5f}")

# Below k_c the modes oscillate; above it they grow at rate k sqrt(kappa^2 k^2 - g eta0).
print(f"\nk_c = {critical_wavenumber(p):g}")

# Dissipation -nu k^4 damps short waves. Just above nu_cr no mode grows,
# just below it a narrow band near sqrt(3/2) k_c survives.
nu_cr = critical_nu(p)
print(f"nu_cr = {nu_cr:.7f}")
for factor in (0.95, 1.05):
    q = Params1D(kappa=0.5, nu=factor * nu_cr)
    growth, k_at = max_growth_rate(q, 8.0)
    print(f"nu = {factor:.2f} nu_cr: max growth {growth: .3e} at k = {k_at:.4f}")
