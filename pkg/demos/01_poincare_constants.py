"""
Poincare constants from inverse iteration.

The certificate only ever sees the smallest eigenvalue of the discrete
operator, so it is worth seeing how close that is to the continuum value
and how it moves with the geometry.
"""

from __future__ import annotations

import math

from elliptic_picard import assemble_operator, build_interval_grid, build_metric_band, build_rectangle_grid
from elliptic_picard.spectral import smallest_eigenvalue

print("unit interval, Dirichlet: lambda1 -> pi^2 =", f"{math.pi**2:.6f}")
for n in (15, 63, 255, 1023):
    rep = smallest_eigenvalue(assemble_operator(build_interval_grid(n)))
    print(f"  n={n:5d}  lambda1={rep.lambda1:.6f}  C={rep.poincare_constant:.6f}  ({rep.iterations} inverse steps)")

# the first nonzero Neumann eigenvalue of the interval is also pi^2
rep = smallest_eigenvalue(assemble_operator(build_interval_grid(255), "neumann"))
print(f"unit interval, Neumann (mean-zero): mu1={rep.lambda1:.6f}")

rep = smallest_eigenvalue(assemble_operator(build_rectangle_grid(63, 63)))
print(f"unit square 63x63: lambda1={rep.lambda1:.4f}  vs 2 pi^2={2 * math.pi**2:.4f}")

# A band on the unit sphere.  Widening it towards the south pole lowers
# lambda1, i.e. raises the Poincare constant, and so makes the contraction
# certificate harder to satisfy.
print("sphere bands [pi/6, theta_max]:")
for top in (math.pi / 3, math.pi / 2, 2 * math.pi / 3, 5 * math.pi / 6):
    rep = smallest_eigenvalue(assemble_operator(build_metric_band(255, math.pi / 6, top)))
    print(f"  theta_max={top:.3f}  lambda1={rep.lambda1:8.4f}  C={rep.poincare_constant:.4f}")
