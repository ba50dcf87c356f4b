"""
Independent oracles and property checks.

Nothing here reuses the sparse assembly in :mod:`operators` when it can be
avoided: manufactured forcings come from analytic Laplacians, the dense
eigen-oracle goes through LAPACK, and the 1D and periodic solvers build
their own stencils.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .grid import Chart, CircleCover
from .nonlinear import Nonlinearity, sample_lipschitz, sample_lipschitz_grad
from .operators import DiscreteOperator, Field, assemble_operator, unknown_mask, weighted_mean
from .picard import ProblemSpec, fixed_point_residual
from .spectral import smallest_eigenvalue

__all__ = [
    "CoverDecomposition",
    "decompose_mean_zero",
    "YoungReport",
    "check_young",
    "MANUFACTURED",
    "catalog_values",
    "manufactured_solution",
    "manufactured_rhs",
    "manufactured_problem",
    "l2_error",
    "sample_lipschitz",
    "sample_lipschitz_grad",
    "residual",
    "dense_eigenvalues",
    "boundary_insertion_solve",
    "periodic_solve",
    "check_poincare",
    "run_lemma_suite",
]

MEAN_TOL = 1e-12
PHASE_WINDOW = (math.sqrt(2.0) - 0.05, math.sqrt(2.0) + 1e-9)


# -- partition of unity on the circle ---------------------------------------


@dataclass(frozen=True)
class CoverDecomposition:
    """``u = u_1 + u_2`` with each part mean-zero and supported in one arc."""

    parts: tuple[np.ndarray, np.ndarray]
    supports: tuple[np.ndarray, np.ndarray]
    integrals: tuple[float | complex, ...]
    sigma: np.ndarray
    spacing: float

    def means(self) -> list[complex]:
        return [complex(np.sum(p) * self.spacing) for p in self.parts]

    def reconstruction_error(self, u: np.ndarray) -> float:
        return float(np.max(np.abs(sum(self.parts) - u), initial=0.0))

    def support_violation(self) -> float:
        out = 0.0
        for p, s in zip(self.parts, self.supports):
            outside = np.ones(p.size, dtype=bool)
            outside[s] = False
            out = max(out, float(np.max(np.abs(p[outside]), initial=0.0)))
        return out


def decompose_mean_zero(cover: CircleCover, u: np.ndarray) -> CoverDecomposition:
    """Split a mean-zero circle field into mean-zero pieces on the two arcs.

    With ``I_1 = sum h chi_1 u`` and the unit-mass bump ``sigma`` living in
    the overlap, ``u_1 = chi_1 u - I_1 sigma`` and ``u_2 = chi_2 u + I_1 sigma``.
    """
    u = np.asarray(u)
    if u.shape != (cover.n,):
        raise ValueError("field must have one value per circle node")
    h = cover.spacing
    mean = np.sum(u) * h / (2.0 * math.pi)
    scale = max(1.0, float(np.max(np.abs(u), initial=0.0)))
    if abs(mean) > MEAN_TOL * scale:
        raise ValueError(f"field is not mean-zero (mean {abs(mean):.3e})")
    i1 = np.sum(cover.chi[0] * u) * h
    u1 = cover.chi[0] * u - i1 * cover.sigma
    u2 = cover.chi[1] * u + i1 * cover.sigma
    return CoverDecomposition(
        parts=(u1, u2),
        supports=(cover.interior_nodes(0), cover.interior_nodes(1)),
        integrals=(i1, -i1),
        sigma=cover.sigma,
        spacing=h,
    )


# -- Young's convolution inequality ----------------------------------------


@dataclass(frozen=True)
class YoungReport:
    lhs: float
    rhs: float
    holds: bool


def circular_convolution(f: np.ndarray, g: np.ndarray, spacing: float) -> np.ndarray:
    """``(f * g)_j = sum_k h f_k g_{j-k}`` with periodic indexing."""
    out = np.fft.ifft(np.fft.fft(f) * np.fft.fft(g)) * spacing
    if np.isrealobj(f) and np.isrealobj(g):
        out = out.real
    return out


def check_young(f: np.ndarray, g: np.ndarray, spacing: float = 1.0) -> YoungReport:
    """Compare ``|f * g|_2`` with ``|f|_1 |g|_2`` on a periodic grid."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g)
    if f.shape != g.shape or f.ndim != 1:
        raise ValueError("f and g must be 1D arrays of equal length")
    if np.any(f < 0):
        raise ValueError("f must be nonnegative")
    conv = circular_convolution(f, g, spacing)
    lhs = math.sqrt(float(np.sum(np.abs(conv) ** 2)) * spacing)
    rhs = float(np.sum(f)) * spacing * math.sqrt(float(np.sum(np.abs(g) ** 2)) * spacing)
    return YoungReport(lhs, rhs, lhs <= rhs * (1.0 + 1e-12))


# -- manufactured solutions -------------------------------------------------

# tag -> (chart kinds, admissible boundary conditions)
MANUFACTURED = {
    "zero": (None, ("dirichlet_zero", "dirichlet_data", "neumann")),
    "sin_pi_x": (("interval",), ("dirichlet_zero", "dirichlet_data")),
    "cos_pi_x": (("interval",), ("neumann",)),
    "sin_pi_xy": (("rectangle",), ("dirichlet_zero", "dirichlet_data")),
    "cos_pi_xy": (("rectangle",), ("neumann",)),
    "cos_theta": (("metric_band",), ("dirichlet_data",)),
    "quadratic_theta": (("metric_band",), ("dirichlet_zero", "dirichlet_data")),
}


def _analytic(chart: Chart, tag: str) -> tuple[np.ndarray, np.ndarray]:
    """``(u*, -Delta_g u*)`` on the full grid."""
    x = chart.coords
    pi = math.pi
    if tag == "zero":
        z = np.zeros(chart.full_shape)
        return z, z
    if tag == "sin_pi_x":
        u = np.sin(pi * x[..., 0])
        return u, pi**2 * u
    if tag == "cos_pi_x":
        u = np.cos(pi * x[..., 0])
        return u, pi**2 * u
    if tag == "sin_pi_xy":
        u = np.sin(pi * x[..., 0]) * np.sin(pi * x[..., 1])
        return u, 2 * pi**2 * u
    if tag == "cos_pi_xy":
        u = np.cos(pi * x[..., 0]) * np.cos(pi * x[..., 1])
        return u, 2 * pi**2 * u
    theta = x[..., 0]
    if tag == "cos_theta":
        # degree-one zonal harmonic on the sphere
        u = np.cos(theta)
        return u, 2.0 * u
    a, b = chart.params["theta_min"], chart.params["theta_max"]
    u = (theta - a) * (b - theta)
    # Delta_g u = u'' + cot(theta) u'
    return u, 2.0 - (a + b - 2.0 * theta) / np.tan(theta)


def _check_tag(chart: Chart, tag: str, bc: str):
    if tag not in MANUFACTURED:
        raise ValueError(f"unknown manufactured solution {tag!r}; known: {sorted(MANUFACTURED)}")
    kinds, bcs = MANUFACTURED[tag]
    if kinds is not None and chart.kind not in kinds:
        raise ValueError(f"{tag} is defined on {kinds}, not on a {chart.kind}")
    if bc not in bcs:
        raise ValueError(f"{tag} does not satisfy boundary condition {bc!r}")
    if bc == "dirichlet_zero":
        u, _ = _analytic(chart, tag)
        if np.max(np.abs(u[chart.boundary_mask])) > 1e-12:
            raise ValueError(f"{tag} is not zero on the boundary of {chart!r}")


def catalog_values(chart: Chart, tag: str) -> np.ndarray:
    """Full-grid samples of catalog function ``tag``, with no boundary-condition check."""
    if tag not in MANUFACTURED:
        raise ValueError(f"unknown catalog function {tag!r}; known: {sorted(MANUFACTURED)}")
    kinds, _ = MANUFACTURED[tag]
    if kinds is not None and chart.kind not in kinds:
        raise ValueError(f"{tag} is defined on {kinds}, not on a {chart.kind}")
    return _analytic(chart, tag)[0]


def manufactured_solution(chart: Chart, tag: str, bc: str) -> Field:
    _check_tag(chart, tag, bc)
    u, _ = _analytic(chart, tag)
    return Field.from_full(chart, u, bc, mean_zero=bc == "neumann")


def manufactured_rhs(
    chart: Chart, tag: str, nonlinearity: Nonlinearity | None = None, xi: float = 0.0, bc: str = "dirichlet_zero"
) -> Field:
    """``f = -Delta_g u* + xi u* + F(u*)`` at the unknown nodes.

    Only for tags without gradient terms in ``F``; gradient nonlinearities
    use :func:`manufactured_problem`, which evaluates the analytic gradient.
    """
    _check_tag(chart, tag, bc)
    nl = nonlinearity or Nonlinearity()
    u, minus_lap = _analytic(chart, tag)
    mask = unknown_mask(chart, bc)
    f = minus_lap[mask] + xi * u[mask] + nl.value(u[mask])
    if nl.has_gradient_term:
        f = f + nl.grad_value(_analytic_gradient(chart, tag)[mask])
    return Field(chart, f, "neumann" if bc == "neumann" else "dirichlet_zero")


def _analytic_gradient(chart: Chart, tag: str) -> np.ndarray:
    x = chart.coords
    pi = math.pi
    g = np.zeros(chart.full_shape + (chart.dim,))
    if tag == "sin_pi_x":
        g[..., 0] = pi * np.cos(pi * x[..., 0])
    elif tag == "cos_pi_x":
        g[..., 0] = -pi * np.sin(pi * x[..., 0])
    elif tag == "sin_pi_xy":
        g[..., 0] = pi * np.cos(pi * x[..., 0]) * np.sin(pi * x[..., 1])
        g[..., 1] = pi * np.sin(pi * x[..., 0]) * np.cos(pi * x[..., 1])
    elif tag == "cos_pi_xy":
        g[..., 0] = -pi * np.sin(pi * x[..., 0]) * np.cos(pi * x[..., 1])
        g[..., 1] = -pi * np.cos(pi * x[..., 0]) * np.sin(pi * x[..., 1])
    elif tag == "cos_theta":
        g[..., 0] = -np.sin(x[..., 0])
    elif tag == "quadratic_theta":
        a, b = chart.params["theta_min"], chart.params["theta_max"]
        g[..., 0] = a + b - 2.0 * x[..., 0]
    return g


def manufactured_problem(
    chart: Chart,
    tag: str,
    nonlinearity: Nonlinearity | None = None,
    xi: float = 0.0,
    bc: str = "dirichlet_zero",
    **kw,
) -> tuple[ProblemSpec, Field]:
    """Problem whose continuous solution is ``u*``, plus ``u*`` itself."""
    nl = nonlinearity or Nonlinearity()
    f = manufactured_rhs(chart, tag, nl, xi, bc)
    exact = manufactured_solution(chart, tag, bc)
    boundary = exact.full() if bc == "dirichlet_data" else None
    problem = ProblemSpec(chart, f.values, nl, bc, boundary, shift=xi, **kw)
    return problem, exact


def l2_error(u: Field, exact: Field) -> float:
    """Weighted l2 distance; Neumann fields are compared modulo constants."""
    d = u.values - exact.values
    w = u.weights
    if u.bc == "neumann":
        d = d - weighted_mean(d, w)
    return math.sqrt(float(np.sum(w * np.abs(d) ** 2)))


# -- residual and solver oracles ---------------------------------------------


def residual(problem: ProblemSpec, u) -> float:
    """Relative strong-form residual ``|A u + F(u) + F2(grad u) - f| / max(|f|, 1)``."""
    values = u.values if isinstance(u, Field) else np.asarray(u, dtype=complex)
    return fixed_point_residual(problem, values)


def dense_eigenvalues(op: DiscreteOperator) -> np.ndarray:
    """All eigenvalues of ``A`` via the dense generalized problem ``K v = lam W v``."""
    return scipy.linalg.eigh(op.shifted_stiffness.toarray(), np.diag(op.mass), eigvals_only=True)


def boundary_insertion_solve(
    chart: Chart, f: np.ndarray, bc: str = "dirichlet_zero", shift: float = 0.0, boundary=(0.0, 0.0)
) -> np.ndarray:
    """Dense 1D oracle on the full grid: identity rows carry Dirichlet data,
    Neumann rows use an explicit ghost node.  Returns full-grid values.

    For the singular Neumann case the mean-zero solution is obtained from a
    bordered system with a trapezoid-mean constraint.
    """
    if chart.kind != "interval":
        raise ValueError("boundary_insertion_solve is a 1D interval oracle")
    h = chart.spacing[0]
    m = chart.full_shape[0]
    f = np.asarray(f, dtype=complex)
    a = np.zeros((m, m))
    rhs = np.zeros(m, dtype=complex)
    for i in range(1, m - 1):
        a[i, i - 1 : i + 2] = np.array([-1.0, 2.0, -1.0]) / h**2
        a[i, i] += shift
    if bc == "neumann":
        if f.size != m:
            raise ValueError("Neumann forcing lives on all nodes")
        # ghost u_{-1} = u_1 and u_{m} = u_{m-2}
        a[0, :2] = np.array([2.0, -2.0]) / h**2
        a[-1, -2:] = np.array([-2.0, 2.0]) / h**2
        a[0, 0] += shift
        a[-1, -1] += shift
        rhs[:] = f
        if shift == 0.0:
            w = np.full(m, h)
            w[[0, -1]] *= 0.5
            rhs = rhs - np.dot(w, rhs) / w.sum()
            bordered = np.zeros((m + 1, m + 1))
            bordered[:m, :m] = a
            bordered[:m, m] = w
            bordered[m, :m] = w
            sol = np.linalg.solve(bordered, np.append(rhs, 0.0))
            return sol[:m]
        return np.linalg.solve(a, rhs)
    if f.size != m - 2:
        raise ValueError("Dirichlet forcing lives on interior nodes")
    a[0, 0] = a[-1, -1] = 1.0
    rhs[1:-1] = f
    rhs[0], rhs[-1] = boundary
    return np.linalg.solve(a, rhs)


def periodic_solve(f: np.ndarray, spacing: float, shift: float = 0.0, symbol: str = "discrete") -> np.ndarray:
    """FFT solve of ``-u'' + shift u = f`` on a uniform periodic grid.

    ``symbol="discrete"`` inverts the three-point stencil exactly,
    ``"continuous"`` uses ``k^2``.  With ``shift == 0`` the mean of ``f``
    is dropped and the mean-zero solution returned.
    """
    f = np.asarray(f, dtype=complex)
    n = f.size
    k = np.fft.fftfreq(n, d=spacing) * 2.0 * math.pi
    if symbol == "discrete":
        lam = (2.0 - 2.0 * np.cos(k * spacing)) / spacing**2
    elif symbol == "continuous":
        lam = k**2
    else:
        raise ValueError(f"unknown symbol {symbol!r}")
    lam = lam + shift
    fh = np.fft.fft(f)
    uh = np.zeros_like(fh)
    nz = np.abs(lam) > 0
    uh[nz] = fh[nz] / lam[nz]
    return np.fft.ifft(uh)


# -- Poincare inequality ------------------------------------------------------


def check_poincare(chart: Chart, bc: str, trials: int = 1000, seed: int = 0) -> float:
    """Largest ``|u|_W / (C |u|_E) - 1`` over random admissible fields.

    ``C`` comes from inverse iteration.  Trials mix white noise, smooth
    random fields and near-eigenvectors, where the inequality is tight.
    """
    op = assemble_operator(chart, "neumann" if bc == "neumann" else "dirichlet_zero")
    report = smallest_eigenvalue(op)
    c = report.poincare_constant
    w = op.mass
    rng = np.random.default_rng(seed)
    worst = -math.inf
    v1 = report.eigenvector
    for t in range(trials):
        kind = t % 3
        z = rng.standard_normal(op.size) + 1j * rng.standard_normal(op.size)
        if kind == 1:
            z = np.cumsum(np.cumsum(z)) / op.size
        elif kind == 2:
            z = v1 + 10.0 ** rng.uniform(-8, -1) * z
        if bc == "neumann":
            z = z - weighted_mean(z, w)
        lhs = math.sqrt(float(np.sum(w * np.abs(z) ** 2)))
        rhs = c * math.sqrt(op.energy(z))
        worst = max(worst, lhs / rhs - 1.0)
    return worst


# -- suite used by the CLI and the acceptance tests --------------------------


def _check(name, trials, violation, ok):
    return {"check_name": name, "trials": int(trials), "max_violation": float(violation), "pass": bool(ok)}


def run_lemma_suite(seed: int = 0, trials: int = 1000) -> list[dict]:
    """Randomized lemma checks; one summary dict per check."""
    from .grid import build_circle_cover, build_interval_grid

    rng = np.random.default_rng(seed)
    out = []

    cover = build_circle_cover(256, 0.1)
    worst = 0.0
    for _ in range(trials):
        u = rng.standard_normal(cover.n) + 1j * rng.standard_normal(cover.n)
        u -= u.mean()
        dec = decompose_mean_zero(cover, u)
        worst = max(
            worst,
            dec.reconstruction_error(u),
            max(abs(m) for m in dec.means()),
            dec.support_violation(),
        )
    out.append(_check("decompose_mean_zero", trials, worst, worst <= 1e-12))

    worst = -math.inf
    ok = True
    for _ in range(trials):
        n = int(rng.integers(8, 257))
        h = 2.0 * math.pi / n
        f = rng.exponential(size=n) * (rng.uniform(size=n) < 0.5)
        g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        rep = check_young(f, g, h)
        ok &= rep.holds
        worst = max(worst, rep.lhs - rep.rhs)
    out.append(_check("check_young", trials, max(worst, 0.0), ok))

    est = sample_lipschitz(Nonlinearity.phase(1.0), 100_000, 10.0, seed=seed)
    lo, hi = PHASE_WINDOW
    out.append(_check("sample_lipschitz_phase_window", 100_000, max(lo - est, est - hi, 0.0), lo <= est <= hi))

    worst = 0.0
    for nl in (
        Nonlinearity.phase(1.0),
        Nonlinearity.sine_real(1.0),
        Nonlinearity.saturating(1.0),
        Nonlinearity.modulus_type(1.0),
        Nonlinearity.linear(0.5 - 2j),
    ):
        est = sample_lipschitz(nl, 20_000, 10.0, seed=seed)
        worst = max(worst, est - nl.declared_c1 * (1.0 + 1e-9))
    out.append(_check("sample_lipschitz_declared_bound", 5 * 20_000, max(worst, 0.0), worst <= 0.0))

    chart = build_interval_grid(127)
    for bc in ("dirichlet_zero", "neumann"):
        viol = check_poincare(chart, bc, trials, seed)
        out.append(_check(f"poincare_{bc}", trials, max(viol, 0.0), viol <= 1e-9))
    return out
