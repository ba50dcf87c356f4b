"""
Second-order convergence against manufactured solutions.

Forcings come from analytic Laplacians, so the error measured here is the
discretization error of the whole pipeline (stencil, lifting, nonlinear
iteration) and nothing else.
"""

from __future__ import annotations

import math

from elliptic_picard import Nonlinearity, build_interval_grid, build_metric_band, build_rectangle_grid, picard_solve
from elliptic_picard.verify import l2_error, manufactured_problem

nl = Nonlinearity.saturating(1.0)
band = lambda n: build_metric_band(n, math.pi / 6, math.pi / 2)  # noqa: E731

cases = [
    ("sin(pi x) on (0,1)", build_interval_grid, "sin_pi_x", "dirichlet_zero", (31, 63, 127, 255, 511)),
    ("sin(pi x) sin(pi y) on the square", lambda n: build_rectangle_grid(n, n), "sin_pi_xy", "dirichlet_zero",
     (15, 31, 63, 127)),
    ("cos(theta) on a sphere band", band, "cos_theta", "dirichlet_data", (31, 63, 127, 255, 511)),
    ("(theta-a)(b-theta) on a sphere band", band, "quadratic_theta", "dirichlet_zero", (31, 63, 127, 255)),
    ("cos(pi x), Neumann", build_interval_grid, "cos_pi_x", "neumann", (31, 63, 127, 255)),
]

for title, build, tag, bc, sizes in cases:
    print(title)
    prev = None
    for n in sizes:
        problem, exact = manufactured_problem(build(n), tag, nl, bc=bc)
        u, rep = picard_solve(problem)
        err = l2_error(u, exact)
        ratio = "" if prev is None else f"ratio {prev / err:.3f}"
        print(f"  n={n:4d}  L2 error {err:.3e}  {ratio}")
        prev = err
