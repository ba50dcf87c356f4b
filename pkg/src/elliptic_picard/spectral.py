"""Smallest Laplacian eigenvalue and the optimal Poincare constant."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EigenSolveError
from .linsolve import LinearSolver
from .operators import DiscreteOperator, project_mean_zero

MODES = ("dirichlet", "neumann_nonzero")


@dataclass(frozen=True)
class SpectralReport:
    """``lambda1`` is the smallest Dirichlet eigenvalue, or the smallest
    nonzero Neumann eigenvalue; ``poincare_constant = lambda1 ** -0.5``."""

    lambda1: float
    poincare_constant: float
    iterations: int
    residual: float
    mode: str
    eigenvector: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "lambda1": self.lambda1,
            "poincare_constant": self.poincare_constant,
            "iterations": self.iterations,
            "residual": self.residual,
        }


def mode_for_bc(bc: str) -> str:
    return "neumann_nonzero" if bc == "neumann" else "dirichlet"


def smallest_eigenvalue(
    op: DiscreteOperator,
    mode: str | None = None,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    seed: int = 0,
) -> SpectralReport:
    """Inverse power iteration for the bottom of the spectrum of ``A``.

    In ``neumann_nonzero`` mode every iterate is projected onto weighted
    mean zero, which removes the constant kernel so the iteration finds the
    first nonzero eigenvalue.  Convergence is declared when the relative
    eigen-residual ``|A v - lam v|_W / (lam |v|_W)`` drops below ``tol``.
    """
    if mode is None:
        mode = mode_for_bc(op.bc)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if (mode == "neumann_nonzero") != (op.bc == "neumann"):
        raise ValueError(f"mode {mode!r} does not match operator boundary condition {op.bc!r}")
    if op.shift != 0.0:
        raise ValueError("pass an unshifted operator; fold the shift in as lambda1 + shift")

    w = op.mass
    solver = LinearSolver(op, tol=1e-10)
    rng = np.random.default_rng(seed)
    v = 1.0 + 0.1 * rng.standard_normal(op.size)
    if mode == "neumann_nonzero":
        v = project_mean_zero(v, w).real

    def wnorm(x):
        return math.sqrt(float(np.sum(w * np.abs(x) ** 2)))

    v = v / wnorm(v)
    lam = math.nan
    residual = math.inf
    for it in range(1, max_iter + 1):
        x, _ = solver.solve_values(v)
        x = x.real
        if mode == "neumann_nonzero":
            x = project_mean_zero(x, w).real
        x /= wnorm(x)
        kx = op.stiffness @ x
        lam = float(np.dot(x, kx))
        residual = wnorm(kx / w - lam * x) / lam
        v = x
        if residual <= tol:
            return SpectralReport(lam, lam ** -0.5, it, residual, mode, v)
    raise EigenSolveError(
        f"inverse iteration stalled after {max_iter} steps (residual {residual:.2e}); "
        "operator may be ill-conditioned"
    )


def poincare_constant(report: SpectralReport, shift: float = 0.0) -> float:
    """Effective constant ``(lambda1 + shift) ** -0.5`` for the shifted operator."""
    return (report.lambda1 + shift) ** -0.5


def contraction_certificate(c1: float, c2: float, report: SpectralReport, shift: float = 0.0) -> float:
    """``rho = C1 C^2 + C2 C``; the Picard iteration is certified when ``rho < 1``."""
    if c1 < 0 or c2 < 0:
        raise ValueError("Lipschitz constants must be nonnegative")
    c = poincare_constant(report, shift)
    return c1 * c * c + c2 * c
