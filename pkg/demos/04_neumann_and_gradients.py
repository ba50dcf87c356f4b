"""
Neumann problems and nonlinearities that depend on the gradient.

Neumann: the unknowns include the boundary nodes and every iterate is kept
at weighted mean zero.  Gradient terms enter the certificate through
``C2 C``, which decays only like ``lambda1 ** -0.5``.
"""

from __future__ import annotations

import math

import numpy as np

from elliptic_picard import CertificateError, Nonlinearity, ProblemSpec, build_interval_grid, build_rectangle_grid, picard_solve

chart = build_rectangle_grid(63, 63)
x, y = chart.coords[..., 0].ravel(), chart.coords[..., 1].ravel()
f = np.cos(np.pi * x) * np.cos(2 * np.pi * y) + 1j * np.cos(3 * np.pi * x) + 0.3
problem = ProblemSpec(chart, f, Nonlinearity.modulus_type(5.0), "neumann")
u, rep = picard_solve(problem, initial=np.ones(chart.n_full))
print(f"Neumann square: rho={rep.rho_certified:.3f}, {rep.iterations} iterations, residual {rep.final_residual:.1e}")
print(f"  largest |mean| over the iterates: {max(r.mean for r in rep.records):.1e}")
print(f"  mean of the forcing that was projected out: {abs(problem.forcing_mean):.3f}")

print()
chart = build_interval_grid(255)
xi = chart.interior_coords[:, 0]
print("saturating F plus b u' on (0,1):")
for b in (0.0, 0.5, 1.0, 1.5, 2.0):
    nl = Nonlinearity.saturating(2.0).with_linear_combo([b])
    try:
        u, rep = picard_solve(ProblemSpec(chart, (1 + 1j) * np.sin(np.pi * xi) + 3 * xi, nl))
    except CertificateError as exc:
        print(f"  b={b:.1f}  {exc}")
        continue
    print(f"  b={b:.1f}  rho={rep.rho_certified:.3f} (gradient part {b / math.pi:.3f})  "
          f"{rep.iterations:2d} it, max ratio {rep.max_ratio:.3f}")
