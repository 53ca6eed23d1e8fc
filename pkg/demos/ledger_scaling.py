"""Resource-ledger scaling across grid sizes.

Every pipeline carries a ledger of primitive query counts and symbolic
depth units.  Sweeping n shows the second-derivative pipeline growing like
(log n)^2 and the Jensen pipeline like log n.
"""

import numpy as np

from qshape import EstimatorConfig, Grid, Poly, WeightVector, test_convex_jensen, test_convex_second_derivative

cfg = EstimatorConfig(eps=0.01, seed=0, noise_mode="exact")
f = Poly([0.1, -0.2, 0.25, 0.05])

print(f"{'n':>6} {'second-deriv depth':>20} {'jensen depth':>14}")
ns = [2**k for k in range(4, 13)]
second, jensen = [], []
for n in ns:
    grid = Grid.uniform(n)
    s = test_convex_second_derivative(f, grid, cfg).ledger.depth_units
    j = test_convex_jensen(f, grid, WeightVector.uniform(n), cfg).ledger.depth_units
    second.append(s)
    jensen.append(j)
    print(f"{n:>6} {s:>20} {j:>14}")

x = np.log(np.log2(ns))
for name, depths in (("second-deriv", second), ("jensen", jensen)):
    y = np.log(depths)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    r2 = 1 - np.sum(resid**2) / np.sum((y - y.mean()) ** 2)
    print(f"{name}: log-log slope {slope:.2f}, R^2 = {r2:.4f}")

print("\nper-primitive counts at n = 256 (second-derivative pipeline):")
v = test_convex_second_derivative(f, Grid.uniform(256), cfg)
for key, count in v.ledger.entries:
    print(f"  {key}: {count}")
