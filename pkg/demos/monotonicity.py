"""Monotonicity testing via the first-derivative threshold pipeline.

Runs the eigenvalue threshold machinery on the encoding of f' (sign-flipped
for the decreasing direction) and reads the sign of the extreme derivative.
"""

from qshape import EstimatorConfig, Grid, Poly, remap_domain, test_monotone

cfg = EstimatorConfig(eps=1e-3, seed=0, noise_mode="exact")
grid = Grid.uniform(16)

print("== f = x/2: trivially increasing ==")
v = test_monotone(Poly([0, 0.5]), grid, "increasing", cfg)
print(f"outcome: {v.outcome}\n")

print("== f = 2x^5 - 6x^3 + 4x on [0.7, 1.25]: decreasing there ==")
f, _ = remap_domain(Poly([0.0, 4.0, 0.0, -6.0, 0.0, 2.0]), 0.7, 1.25)
v = test_monotone(f, grid, "decreasing", cfg)
print(f"outcome: {v.outcome}")
print(f"estimate {v.estimates['lambda_max']:.6f} vs threshold 1/2, margin {v.margin:.6f}\n")

print("== f = x^2 straddling 0: not monotone ==")
v = test_monotone(Poly([0, 0, 1.0]), grid, "increasing", cfg)
print(f"outcome: {v.outcome}, witness x = {v.witness:.4f} (f' < 0 there)")
