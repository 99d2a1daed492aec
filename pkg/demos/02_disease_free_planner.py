"""The planner without disease: a textbook growth steady state.

Run: python3 demos/02_disease_free_planner.py
"""

from epigrowth import load_preset
from epigrowth.planner import solve_disease_free_ss

model, _ = load_preset("section6")

# At the preset birth rate the epidemic cannot persist, so the planner spends
# nothing on health or control and capital satisfies f_k = theta + delta_K + b - mu.
sol = solve_disease_free_ss(model)
print(f"k* = {sol.state.k:.6f}  c* = {sol.controls.c:.6f}  residual = {sol.residual_norm:.1e}")

# Patience raises the capital stock.
for theta in (0.01, 0.03, 0.05, 0.1, 0.2):
    s = solve_disease_free_ss(model, theta=theta)
    print(f"theta = {theta:4.2f}   k* = {s.state.k:8.4f}   c* = {s.controls.c:.4f}")
