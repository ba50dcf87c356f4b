"""Linear Poisson solves ``A u = f`` for Dirichlet and mean-zero Neumann problems."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import LinearSolveError
from .operators import DiscreteOperator, Field, project_mean_zero, weighted_mean

logger = logging.getLogger(__name__)

DIRECT_LIMIT = 100_000
METHODS = ("auto", "direct_cholesky_like", "conjugate_gradient")


@dataclass(frozen=True)
class LinearSolveStats:
    iterations: int
    residual_norm: float
    method: str
    backward_error: float = 0.0
    projection: float = 0.0


class LinearSolver:
    """Factorize once, solve many right-hand sides.

    Neumann operators without shift are singular with kernel = constants.
    In that case only,
    the right-hand side is projected onto weighted-mean-zero functions, the
    system is solved with the first node pinned to zero (the reduced matrix
    is symmetric positive definite), and the result is shifted to weighted
    mean zero.  Pinning is exact: the dropped equation is the negative sum
    of the others once the right-hand side is compatible.

    Success is judged by the normwise backward error
    ``|A u - b| / (|A| |u| + |b|)``; the plain relative residual is also
    reported but grows with the condition number on fine grids.
    """

    def __init__(self, op: DiscreteOperator, method: str = "auto", tol: float = 1e-12, maxiter: int | None = None):
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
        if method == "auto":
            method = "direct_cholesky_like" if op.size <= DIRECT_LIMIT else "conjugate_gradient"
        self.op = op
        self.method = method
        self.tol = float(tol)
        self.maxiter = maxiter or 10 * op.size
        self.singular = op.bc == "neumann" and op.shift == 0.0
        self._norm_a = op.inf_norm
        matrix = op.shifted_stiffness.tocsc()
        if method == "direct_cholesky_like":
            if self.singular:
                matrix = matrix[1:, 1:]
            self._lu = spla.splu(matrix, permc_spec="MMD_AT_PLUS_A")
        else:
            self._matrix = op.shifted_stiffness
            diag = self._matrix.diagonal()
            self._precond = sp.diags(1.0 / diag)

    def _direct(self, b: np.ndarray) -> np.ndarray:
        if self.singular:
            rhs = np.column_stack([b.real[1:], b.imag[1:]])
            sol = self._lu.solve(rhs)
            x = np.zeros(b.size, dtype=complex)
            x[1:] = sol[:, 0] + 1j * sol[:, 1]
            return x
        sol = self._lu.solve(np.column_stack([b.real, b.imag]))
        return sol[:, 0] + 1j * sol[:, 1]

    def _cg(self, b: np.ndarray) -> tuple[np.ndarray, int]:
        counter = {"n": 0}

        def callback(_):
            counter["n"] += 1

        x = np.zeros(b.size, dtype=complex)
        for part, unit in ((b.real, 1.0), (b.imag, 1j)):
            if not np.any(part):
                continue
            sol, info = spla.cg(
                self._matrix, part, rtol=self.tol, atol=0.0, maxiter=self.maxiter, M=self._precond, callback=callback
            )
            if info > 0:
                raise LinearSolveError(f"conjugate gradient did not converge in {self.maxiter} iterations")
            if info < 0:
                raise LinearSolveError("conjugate gradient breakdown (indefinite operator?)")
            x = x + unit * sol
        return x, counter["n"]

    def solve_values(self, rhs: np.ndarray) -> tuple[np.ndarray, LinearSolveStats]:
        op = self.op
        rhs = np.asarray(rhs, dtype=complex).reshape(-1)
        if rhs.size != op.size:
            raise ValueError(f"right-hand side has {rhs.size} entries, operator has {op.size} unknowns")
        projection = 0.0
        if self.singular:
            projection = abs(weighted_mean(rhs, op.mass))
            rhs = project_mean_zero(rhs, op.mass)
        b = op.mass * rhs
        if self.method == "direct_cholesky_like":
            u, iterations = self._direct(b), 0
        else:
            u, iterations = self._cg(b)
        if self.singular:
            u = project_mean_zero(u, op.mass)

        r = op.apply(u) - rhs
        r_norm = np.sqrt(np.sum(op.mass * np.abs(r) ** 2))
        b_norm = np.sqrt(np.sum(op.mass * np.abs(rhs) ** 2))
        u_norm = np.sqrt(np.sum(op.mass * np.abs(u) ** 2))
        relative = float(r_norm / b_norm) if b_norm > 0 else float(r_norm)
        denom = self._norm_a * u_norm + b_norm
        backward = float(r_norm / denom) if denom > 0 else 0.0
        if not np.isfinite(backward) or backward > self.tol:
            raise LinearSolveError(
                f"linear solve missed tolerance: backward error {backward:.3e} > {self.tol:.1e} "
                "(singular or indefinite assembly?)"
            )
        stats = LinearSolveStats(iterations, relative, self.method, backward, projection)
        return u, stats

    def solve(self, rhs) -> tuple[Field, LinearSolveStats]:
        values = rhs.values if isinstance(rhs, Field) else rhs
        if isinstance(rhs, Field) and rhs.chart != self.op.chart:
            raise ValueError("right-hand side lives on a different chart")
        u, stats = self.solve_values(values)
        bc = "neumann" if self.op.bc == "neumann" else "dirichlet_zero"
        return Field(self.op.chart, u, bc, mean_zero=self.singular), stats


def solve_linear(op: DiscreteOperator, rhs, tol: float = 1e-12, method: str = "auto") -> tuple[Field, LinearSolveStats]:
    """Solve ``A u = rhs`` (``A u = P rhs`` with mean-zero ``u`` for unshifted Neumann)."""
    return LinearSolver(op, method=method, tol=tol).solve(rhs)
