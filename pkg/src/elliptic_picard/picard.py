"""
Certified Picard iteration for ``-Delta_g u + shift u + F(u) + F2(grad u) = f``.

The iteration solves one linear problem per step,

    A u_0 = f,        A u_k = f - F(u_{k-1}) - F2(grad u_{k-1}),

and refuses to start unless ``rho = C1 C^2 + C2 C < 1`` where ``C`` is the
discrete Poincare constant ``(lambda1 + shift) ** -0.5`` of the operator.
Under that hypothesis successive differences contract by ``rho`` in the
energy norm ``|d|^2 = d^* (K + shift W) d``, which is what the step records
measure.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import CertificateError, ConfigError
from .grid import CircleCover, Chart
from .linsolve import LinearSolver
from .nonlinear import Nonlinearity, sample_lipschitz, sample_lipschitz_grad
from .operators import (
    DiscreteOperator,
    Field,
    assemble_operator,
    gradient,
    node_weights,
    project_mean_zero,
    unknown_mask,
    weighted_mean,
)
from .spectral import SpectralReport, mode_for_bc, poincare_constant, smallest_eigenvalue

logger = logging.getLogger(__name__)

DEFAULT_RATIO_SLACK = 0.1
LIPSCHITZ_SAMPLES = 4096


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Equation data for one semilinear solve.

    ``forcing`` lives on the unknown nodes of ``(chart, bc)``.  For
    ``bc="dirichlet_data"``, ``boundary`` is a full-grid extension of the
    boundary values (only its boundary entries matter for the final
    solution).  ``offset`` is set by :func:`lift_boundary` and translates
    the nonlinearity's argument.
    """

    chart: Chart
    forcing: np.ndarray
    nonlinearity: Nonlinearity = field(default_factory=Nonlinearity)
    bc: str = "dirichlet_zero"
    boundary: np.ndarray | None = None
    shift: float = 0.0
    picard_tol: float = 1e-10
    max_iters: int = 200
    offset: np.ndarray | None = None

    def __post_init__(self):
        mask = unknown_mask(self.chart, self.bc)
        f = self.forcing.values if isinstance(self.forcing, Field) else self.forcing
        f = np.asarray(f, dtype=complex).reshape(-1)
        if f.size != int(mask.sum()):
            raise ValueError(f"forcing has {f.size} values, expected {int(mask.sum())} for bc={self.bc}")
        object.__setattr__(self, "forcing", f)
        if not np.isfinite(self.shift) or self.shift < 0.0:
            raise ValueError("shift must be a nonnegative real")
        if self.picard_tol <= 0 or self.max_iters < 1:
            raise ValueError("picard_tol must be positive and max_iters at least 1")
        for name in ("boundary", "offset"):
            value = getattr(self, name)
            if value is not None:
                value = value.full() if isinstance(value, Field) else np.asarray(value, dtype=complex)
                if value.shape != self.chart.full_shape:
                    raise ValueError(f"{name} must be a full-grid array of shape {self.chart.full_shape}")
                object.__setattr__(self, name, value)
        if self.bc == "dirichlet_data" and self.boundary is None:
            raise ValueError("dirichlet_data problem is missing its boundary data")
        if self.offset is not None and self.bc != "dirichlet_zero":
            raise ValueError("offset only applies to lifted dirichlet_zero problems")

    @cached_property
    def operator(self) -> DiscreteOperator:
        return assemble_operator(self.chart, self.bc, self.shift)

    @property
    def weights(self) -> np.ndarray:
        return node_weights(self.chart, self.bc)

    @property
    def singular(self) -> bool:
        """Unshifted Neumann: solutions live in the mean-zero space."""
        return self.bc == "neumann" and self.shift == 0.0

    @property
    def forcing_mean(self) -> complex:
        return weighted_mean(self.forcing, self.weights)

    def state(self, values: np.ndarray) -> Field:
        """The physical field for unknown-node ``values`` (lift undone)."""
        if self.offset is not None:
            full = np.array(self.offset)
            full[unknown_mask(self.chart, self.bc)] += values
            return Field.from_full(self.chart, full, "dirichlet_data")
        if self.bc == "dirichlet_data":
            return Field(self.chart, values, "dirichlet_data", self.boundary)
        return Field(self.chart, values, self.bc, mean_zero=self.singular)


def nonlinear_term(problem: ProblemSpec, values: np.ndarray) -> np.ndarray:
    """``F(u) + F2(grad u)`` at the unknown nodes (unnormalized)."""
    nl = problem.nonlinearity
    state = problem.state(values)
    out = nl.value(state.values)
    if nl.has_gradient_term:
        out = out + nl.grad_value(gradient(problem.chart, state))
    return out


def fixed_point_residual(problem: ProblemSpec, values: np.ndarray) -> float:
    """``|A u + F(u) + F2(grad u) - f|_l2 / max(|f|_l2, 1)``, projected for Neumann."""
    values = np.asarray(values, dtype=complex)
    op = problem.operator
    if problem.bc == "dirichlet_data":
        r = op.apply_full(problem.state(values).full())
    else:
        r = op.apply(values)
    r = r + nonlinear_term(problem, values) - problem.forcing
    if problem.singular:
        r = project_mean_zero(r, op.mass)
    w = op.mass
    f_norm = math.sqrt(float(np.sum(w * np.abs(problem.forcing) ** 2)))
    return math.sqrt(float(np.sum(w * np.abs(r) ** 2))) / max(f_norm, 1.0)


@dataclass
class StepRecord:
    k: int
    energy_diff: float
    ratio: float | None
    mean: float | None = None


@dataclass
class IterationReport:
    rho_certified: float
    c1: float
    c2: float
    poincare_constant: float
    lambda1: float
    shift: float
    records: list[StepRecord] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    final_residual: float = math.nan
    uniqueness_check: float | None = None
    ratio_slack: float = DEFAULT_RATIO_SLACK

    @property
    def observed_ratios(self) -> list[float]:
        return [r.ratio for r in self.records if r.k >= 2 and r.ratio is not None]

    @property
    def max_ratio(self) -> float | None:
        ratios = self.observed_ratios
        return max(ratios) if ratios else None

    @property
    def ratio_bound(self) -> float:
        return self.rho_certified * (1.0 + self.ratio_slack) + 1e-8

    def ratios_within_bound(self) -> bool:
        return all(r <= self.ratio_bound for r in self.observed_ratios)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["max_ratio"] = self.max_ratio
        out["ratio_bound"] = self.ratio_bound
        out["ratios_within_bound"] = self.ratios_within_bound()
        return out

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)

    def steps_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "energy_diff", "ratio"])
        for r in self.records:
            writer.writerow([r.k, repr(r.energy_diff), "" if r.ratio is None else repr(r.ratio)])
        return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def certify(problem: ProblemSpec, spectral: SpectralReport | None = None) -> tuple[float, float, SpectralReport]:
    """Return ``(rho, C, spectral_report)`` for ``problem`` without iterating."""
    if spectral is None:
        bare_bc = "neumann" if problem.bc == "neumann" else "dirichlet_zero"
        spectral = smallest_eigenvalue(assemble_operator(problem.chart, bare_bc), mode_for_bc(problem.bc))
    c = poincare_constant(spectral, problem.shift)
    if problem.bc == "neumann" and problem.shift > 0.0:
        # constants are admissible again, so the bottom of the spectrum is the shift
        c = problem.shift**-0.5
    nl = problem.nonlinearity
    rho = nl.declared_c1 * c * c + nl.declared_c2(problem.chart.dim) * c
    return rho, c, spectral


def _check_declared_constants(problem: ProblemSpec, u0: np.ndarray):
    nl = problem.nonlinearity
    state = problem.state(u0)
    radius = 10.0 * max(float(np.max(np.abs(state.values), initial=0.0)), 0.1)
    est = sample_lipschitz(nl, LIPSCHITZ_SAMPLES, radius)
    if est > nl.declared_c1 * (1.0 + 1e-9) + 1e-12:
        raise ConfigError(
            f"declared C1 = {nl.declared_c1:.6g} is not a Lipschitz bound: sampling found ratio {est:.6g}"
        )
    if nl.has_gradient_term:
        dim = problem.chart.dim
        g = gradient(problem.chart, state)
        g_radius = 10.0 * max(float(np.max(np.abs(g), initial=0.0)), 0.1)
        est2 = sample_lipschitz_grad(nl, dim, LIPSCHITZ_SAMPLES, g_radius)
        if est2 > nl.declared_c2(dim) * (1.0 + 1e-9) + 1e-12:
            raise ConfigError(
                f"declared C2 = {nl.declared_c2(dim):.6g} is not a Lipschitz bound: sampling found {est2:.6g}"
            )


def _run(problem, solver, f_eff, n0, start, tol, max_iters, records):
    op = problem.operator
    u_prev = start
    prev_diff = None
    for k in range(1, max_iters + 1):
        rhs = f_eff - (nonlinear_term(problem, u_prev) - n0)
        u, _ = solver.solve_values(rhs)
        diff = math.sqrt(max(op.energy(u - u_prev), 0.0))
        ratio = diff / prev_diff if prev_diff else None
        if records is not None:
            mean = abs(weighted_mean(u, op.mass)) if problem.singular else None
            records.append(StepRecord(k, diff, ratio, mean))
        u_prev, prev_diff = u, diff
        if diff <= tol:
            return u, k, True
    return u_prev, max_iters, False


def picard_solve(
    problem: ProblemSpec,
    initial=None,
    *,
    spectral: SpectralReport | None = None,
    check_uniqueness: bool = False,
    check_lipschitz: bool = True,
    solver_method: str = "auto",
    ratio_slack: float = DEFAULT_RATIO_SLACK,
) -> tuple[Field, IterationReport]:
    """Run the certified iteration.

    Parameters
    ----------
    problem : ProblemSpec
    initial : array or Field, optional
        Starting iterate; defaults to ``u_0 = A^{-1} f``.
    spectral : SpectralReport, optional
        Precomputed report for the unshifted operator of ``problem``.
    check_uniqueness : bool
        Also iterate from ``u = 0`` and record the energy distance between
        the two limits.

    Raises
    ------
    CertificateError
        If ``rho >= 1``; nothing is iterated.
    ConfigError
        If sampling shows a declared Lipschitz constant is too small.
    """
    if problem.bc == "dirichlet_data":
        lifted = lift_boundary(problem)
        u, report = picard_solve(
            lifted,
            None if initial is None else _lift_initial(problem, initial),
            spectral=spectral,
            check_uniqueness=check_uniqueness,
            check_lipschitz=check_lipschitz,
            solver_method=solver_method,
            ratio_slack=ratio_slack,
        )
        # the lifted run already hands back the physical field u = w + g
        return u, report

    rho, c, spectral = certify(problem, spectral)
    nl = problem.nonlinearity
    report = IterationReport(
        rho_certified=rho,
        c1=nl.declared_c1,
        c2=nl.declared_c2(problem.chart.dim),
        poincare_constant=c,
        lambda1=spectral.lambda1,
        shift=problem.shift,
        ratio_slack=ratio_slack,
    )
    if rho >= 1.0:
        raise CertificateError(
            f"contraction certificate fails: rho = C1 C^2 + C2 C = {rho:.6g} >= 1 "
            f"(C1={report.c1:.6g}, C2={report.c2:.6g}, C={c:.6g}); refusing to iterate",
            rho,
        )

    op = problem.operator
    solver = LinearSolver(op, method=solver_method)
    zeros = np.zeros(op.size, dtype=complex)
    # F(0) may be nonzero (and node-dependent after lifting); move it to the forcing
    n0 = nonlinear_term(problem, zeros)
    f_eff = problem.forcing - n0
    u0, _ = solver.solve_values(f_eff)
    if check_lipschitz:
        _check_declared_constants(problem, u0)

    if initial is None:
        start = u0
    else:
        start = np.asarray(initial.values if isinstance(initial, Field) else initial, dtype=complex).reshape(-1)
        if start.size != op.size:
            raise ValueError("initial iterate has the wrong size")
        if problem.singular:
            start = project_mean_zero(start, op.mass)

    u, iterations, converged = _run(
        problem, solver, f_eff, n0, start, problem.picard_tol, problem.max_iters, report.records
    )
    report.iterations = iterations
    report.converged = converged
    report.final_residual = fixed_point_residual(problem, u)
    if not converged:
        logger.warning("Picard iteration hit max_iters=%d without converging", problem.max_iters)

    if check_uniqueness:
        other_start = zeros if initial is None else u0
        v, _, _ = _run(problem, solver, f_eff, n0, other_start, problem.picard_tol, problem.max_iters, None)
        report.uniqueness_check = math.sqrt(max(op.energy(u - v), 0.0))

    return problem.state(u), report


def _lift_initial(problem: ProblemSpec, initial) -> np.ndarray:
    mask = unknown_mask(problem.chart, problem.bc)
    values = initial.values if isinstance(initial, Field) else np.asarray(initial, dtype=complex)
    return values - problem.boundary[mask]


def lift_boundary(problem: ProblemSpec) -> ProblemSpec:
    """Turn a ``dirichlet_data`` problem into a zero-boundary one.

    With ``u = w + g`` (``g`` the full-grid extension), ``w`` solves
    ``A w + F(w + g) + F2(grad w + grad g) = f - A_full g`` with ``w = 0``
    on the boundary.  Translation keeps the Lipschitz constants, so the
    certificate is unchanged.
    """
    if problem.bc != "dirichlet_data":
        raise ValueError("lift_boundary needs a dirichlet_data problem")
    if problem.boundary is None:
        raise ValueError("missing boundary data")
    g = problem.boundary
    forcing = problem.forcing - problem.operator.apply_full(g)
    return replace(problem, bc="dirichlet_zero", forcing=forcing, boundary=None, offset=g)


def standing_wave_problem(
    xi: float,
    nonlinearity: Nonlinearity,
    boundary,
    chart: Chart,
    mode: str = "schrodinger",
    **kw,
) -> ProblemSpec:
    """Profile equation for standing waves ``u(t, x) = exp(i xi t) Q(x)``.

    Schrodinger mode gives ``-Delta Q + xi Q + F(Q) = 0``; wave mode gives
    ``-Delta Q + xi^2 Q + F(Q) = 0``.  ``boundary`` is a full-grid array or
    Field carrying the Dirichlet values of ``Q`` (``None`` for zero).
    """
    if mode == "schrodinger":
        if xi < 0:
            raise ValueError("Schrodinger standing waves need xi >= 0")
        shift = float(xi)
    elif mode == "wave":
        shift = float(xi) ** 2
    else:
        raise ValueError(f"unknown standing-wave mode {mode!r}")
    if boundary is None:
        boundary = np.zeros(chart.full_shape, dtype=complex)
    n = int(unknown_mask(chart, "dirichlet_data").sum())
    return ProblemSpec(
        chart=chart,
        forcing=np.zeros(n, dtype=complex),
        nonlinearity=nonlinearity,
        bc="dirichlet_data",
        boundary=boundary,
        shift=shift,
        **kw,
    )


@dataclass
class GlueDiagnostics:
    rho: float
    arc_poincare_constants: tuple[float, float]
    interfaces: tuple[int, int]
    overlap_mismatch: float
    value_jump: tuple[float, float]
    derivative_jump: tuple[float, float]
    interface_residual: tuple[float, float]
    residual_away: float
    arc_reports: tuple[IterationReport, IterationReport] = field(repr=False, default=None)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("arc_reports")
        return _jsonable(out)


def periodic_residual(cover: CircleCover, v: np.ndarray, f: np.ndarray, nonlinearity: Nonlinearity) -> np.ndarray:
    """Nodewise ``-v'' + F(v) - f`` with the periodic three-point stencil."""
    h = cover.spacing
    lap = (2.0 * v - np.roll(v, 1) - np.roll(v, -1)) / h**2
    return lap + nonlinearity.value(v) - f


def glue_circle_solve(
    cover: CircleCover,
    f: np.ndarray,
    nonlinearity: Nonlinearity,
    h: tuple[complex, complex],
    picard_tol: float = 1e-10,
    max_iters: int = 200,
) -> tuple[np.ndarray, GlueDiagnostics]:
    """Two-chart solve of ``-u'' + F(u) = f`` on the circle.

    Solves on ``U_1`` with artificial Dirichlet values ``h`` at its two
    boundary nodes, then on ``U_2`` with values read off ``u_1``, and glues:
    ``u_2`` on ``U_2``, ``u_1`` everywhere else.  Nothing guarantees the
    glued field solves the periodic problem for nonzero ``F``; the returned
    diagnostics quantify how far it is from doing so.
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != (cover.n,):
        raise ValueError("forcing must have one value per circle node")
    reports = []
    for arc in cover.arcs:
        reports.append(smallest_eigenvalue(assemble_operator(arc, "dirichlet_zero")))
    d = tuple(r.poincare_constant for r in reports)
    c = max(d)
    rho = nonlinearity.declared_c1 * c * c
    if nonlinearity.has_gradient_term:
        raise ValueError("circle gluing supports F(u) only")
    if rho >= 1.0:
        raise CertificateError(f"gluing certificate fails: C1 max(D1, D2)^2 = {rho:.6g} >= 1", rho)

    def arc_solve(i, boundary_pair):
        arc = cover.arcs[i]
        nodes = cover.arc_nodes[i]
        g = np.zeros(arc.full_shape, dtype=complex)
        g[0], g[-1] = boundary_pair
        problem = ProblemSpec(
            arc, f[nodes[1:-1]], nonlinearity, "dirichlet_data", g, picard_tol=picard_tol, max_iters=max_iters
        )
        u, rep = picard_solve(problem, spectral=reports[i])
        out = np.full(cover.n, np.nan + 0j)
        out[nodes] = u.full()
        return out, rep

    u1, rep1 = arc_solve(0, h)
    b2 = cover.boundary_nodes(1)
    u2, rep2 = arc_solve(1, (u1[b2[0]], u1[b2[1]]))

    v = np.array(u1)
    inside2 = cover.interior_nodes(1)
    v[inside2] = u2[inside2]

    hstep = cover.spacing
    res = periodic_residual(cover, v, f, nonlinearity)
    value_jump, deriv_jump, iface_res = [], [], []
    # U_2 lies on the "+" side of its first boundary node and the "-" side of its last
    for b, inward in ((b2[0], 1), (b2[1], -1)):
        nb = (b + inward) % cover.n
        value_jump.append(float(abs(u1[b] - u2[b])))
        deriv_jump.append(float(abs(u2[nb] - u1[nb]) / hstep))
        iface_res.append(float(abs(res[b])))
    dist = np.min(np.abs((np.arange(cover.n)[:, None] - b2[None, :] + cover.n // 2) % cover.n - cover.n // 2), axis=1)
    away = dist >= 2
    f_norm = math.sqrt(float(np.sum(hstep * np.abs(f) ** 2)))
    residual_away = math.sqrt(float(np.sum(hstep * np.abs(res[away]) ** 2))) / max(f_norm, 1.0)
    overlap = cover.overlap
    diag = GlueDiagnostics(
        rho=rho,
        arc_poincare_constants=d,
        interfaces=(int(b2[0]), int(b2[1])),
        overlap_mismatch=float(np.max(np.abs(u1[overlap] - u2[overlap]))),
        value_jump=tuple(value_jump),
        derivative_jump=tuple(deriv_jump),
        interface_residual=tuple(iface_res),
        residual_away=residual_away,
        arc_reports=(rep1, rep2),
    )
    return v, diag
