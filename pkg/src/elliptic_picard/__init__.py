"""Certified Picard iteration for complex semilinear elliptic problems.

Solves ``-Delta_g u + xi u + F(u) + F2(grad u) = f`` on intervals,
rectangles and axisymmetric sphere bands, after checking the contraction
certificate ``C1 C^2 + C2 C < 1`` built from the discrete Poincare
constant.
"""

from .errors import CertificateError, ConfigError, EigenSolveError, LinearSolveError, NumericalError
from .grid import (
    Chart,
    CircleCover,
    build_circle_cover,
    build_interval_grid,
    build_metric_band,
    build_rectangle_grid,
)
from .linsolve import LinearSolver, LinearSolveStats, solve_linear
from .nonlinear import Nonlinearity, sample_lipschitz
from .operators import DiscreteOperator, Field, assemble_operator, gradient, inner_product, norm
from .picard import (
    GlueDiagnostics,
    IterationReport,
    ProblemSpec,
    StepRecord,
    certify,
    glue_circle_solve,
    lift_boundary,
    picard_solve,
    standing_wave_problem,
)
from .spectral import SpectralReport, contraction_certificate, poincare_constant, smallest_eigenvalue

__version__ = "0.1.0"

__all__ = [
    "CertificateError",
    "ConfigError",
    "EigenSolveError",
    "LinearSolveError",
    "NumericalError",
    "Chart",
    "CircleCover",
    "build_circle_cover",
    "build_interval_grid",
    "build_metric_band",
    "build_rectangle_grid",
    "LinearSolver",
    "LinearSolveStats",
    "solve_linear",
    "Nonlinearity",
    "sample_lipschitz",
    "DiscreteOperator",
    "Field",
    "assemble_operator",
    "gradient",
    "inner_product",
    "norm",
    "GlueDiagnostics",
    "IterationReport",
    "ProblemSpec",
    "StepRecord",
    "certify",
    "glue_circle_solve",
    "lift_boundary",
    "picard_solve",
    "standing_wave_problem",
    "SpectralReport",
    "contraction_certificate",
    "poincare_constant",
    "smallest_eigenvalue",
]
