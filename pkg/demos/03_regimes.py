"""Which steady state does the planner choose once the disease is endemic?

Run: python3 demos/03_regimes.py
"""

import numpy as np

import epigrowth.planner as pl
from epigrowth import load_preset

model, _ = load_preset("section6")
lo, hi = pl.endemic_window(model)
print(f"birth rates with an endemic disease: [{lo:.4f}, {hi:.4f})")

# Below the health-spending threshold the planner funds health; above it, nothing.
for b in (0.006, 0.009, 0.012):
    th = pl.theta_thresholds(model, b=b)
    print(f"\nb = {b}: health threshold {th.theta1:.4f}, control threshold {th.theta2:.4f}")
    for theta in (0.02, 0.08, 0.2):
        (sol,) = pl.classify_steady_state(model, b=b, theta=theta)
        print(f"  theta = {theta:4.2f}  {sol.regime:<16} m = {sol.controls.m:.4f}  "
              f"i = {sol.state.i:.5f}  k = {sol.state.k:.4f}")

# With a transmission rate that learning can lower, several optimality points coexist.
# The first-order conditions are necessary only, so each is reported.
learning, _ = load_preset("learning")
print(f"\nlearning preset at b = {learning.params.b}, theta = 0.08:")
for sol in pl.classify_steady_state(learning, theta=0.08):
    print(f"  {sol.regime:<16} m = {sol.controls.m:.4f}  A = {sol.controls.A:.4f}  "
          f"c = {sol.controls.c:.4f}  residual = {sol.residual_norm:.1e}"
          f"{'  (predicted)' if sol.predicted else ''}")

# The shadow value of health capital falls with impatience.
print("\nl_theta,3 at the origin, b = 0.008:")
print(np.round([pl.l_theta(3, 0, 0, 0, model, theta=t, b=0.008) for t in (0.01, 0.05, 0.1, 0.2)], 4))
