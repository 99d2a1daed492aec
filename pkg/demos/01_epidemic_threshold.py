"""Epidemic threshold: when does vaccination keep the disease out?

Run: python3 demos/01_epidemic_threshold.py
"""

import numpy as np

from epigrowth.dynamics import simulate_epi
from epigrowth.equilibria import bifurcation_scan, df_stability, endemic_eq, reproduction_numbers

beta, gamma, b, p = 0.5, 0.1, 0.02, 0.2

# The disease invades when the vaccination-adjusted reproduction number exceeds one.
r0, r_vac, p_crit = reproduction_numbers(beta, gamma, b, p)
print(f"R0 = {r0:.3f}, adjusted R = {r_vac:.3f}, vaccination share needed = {p_crit:.3f}")

# Above the threshold the disease-free state is unstable and an endemic state appears.
print("disease-free eigenvalues:", np.round(df_stability(beta, gamma, b, p).eigenvalues.real, 4))
star = endemic_eq(beta, gamma, b, p)
print(f"endemic state: s={star.s:.4f} i={star.i:.4f} r={star.r:.4f} v={star.v:.4f}")

# A small outbreak converges to it.
traj = simulate_epi([1 - p - 0.001, 0.001, 0.0, p], beta, gamma, b, p, (0, 1500), 1e-10,
                    np.linspace(0, 1500, 7))
for t, i in zip(traj.t, traj["i"]):
    print(f"  t = {t:6.0f}   i = {i:.6f}")

# Raising the vaccination share past the critical level removes the endemic branch.
print("\n   p   adjusted R   disease-free stable   endemic i")
for row in bifurcation_scan(np.linspace(0.0, 0.95, 9), "p", beta=beta, gamma=gamma, b=b):
    i = "-" if np.isnan(row.i_endemic) else f"{row.i_endemic:.4f}"
    print(f"{row.value:5.2f}   {row.r_vac:9.3f}   {str(row.df_stable):>19}   {i:>9}")
