"""
Discrete Laplace / Laplace-Beltrami operators and the L2, energy and H1
inner products.

The operator is stored in weak form as a real symmetric stiffness matrix
``K`` and a diagonal lumped mass ``W`` on the unknown nodes, so that the
discrete negative Laplacian is ``A = W^{-1} K``.  ``A`` is self-adjoint for
the weighted inner product ``<u, v> = sum_i W_i u_i conj(v_i)``; on flat
Dirichlet charts ``W`` is a multiple of the identity and ``A`` itself is
symmetric.

Unknown nodes depend on the boundary condition: Dirichlet problems carry
the interior nodes only, Neumann problems carry every node of the full
grid, with trapezoid (half) weights on boundary nodes.  The half weights
are what make ``W^{-1} K`` equal to the ghost-node reflection stencil.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.io
import scipy.sparse as sp

from .grid import Chart

BC_KINDS = ("dirichlet_zero", "dirichlet_data", "neumann")
INNER_PRODUCT_KINDS = ("l2", "energy", "h1")


def _check_bc(bc: str) -> str:
    if bc not in BC_KINDS:
        raise ValueError(f"unknown boundary condition {bc!r}; expected one of {BC_KINDS}")
    return bc


def unknown_mask(chart: Chart, bc: str) -> np.ndarray:
    """Full-grid boolean mask of the nodes that carry unknowns for ``bc``."""
    if _check_bc(bc) == "neumann":
        return np.ones(chart.full_shape, dtype=bool)
    return ~chart.boundary_mask


def _axis_node_weights(chart: Chart, bc: str) -> list[np.ndarray]:
    # 1D quadrature weights per axis on the full grid; Dirichlet boundary
    # nodes get weight 0 so they drop out of tangential sums.
    out = []
    for n, h in zip(chart.shape, chart.spacing):
        w = np.full(n + 2, h)
        w[[0, -1]] = 0.5 * h if bc == "neumann" else 0.0
        out.append(w)
    return out


def _outer(vectors: list[np.ndarray]) -> np.ndarray:
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def full_mass(chart: Chart, bc: str) -> np.ndarray:
    """Lumped mass on the full grid (zero on Dirichlet boundary nodes)."""
    return chart.metric_weight * _outer(_axis_node_weights(chart, _check_bc(bc)))


def node_weights(chart: Chart, bc: str) -> np.ndarray:
    """Quadrature weights on the unknown nodes, flattened in C order."""
    return full_mass(chart, bc)[unknown_mask(chart, bc)]


def _face_coefficients(chart: Chart, bc: str) -> list[np.ndarray]:
    """Per-axis flux coefficients on faces between neighbouring nodes.

    Along axis ``a`` the face between nodes ``i`` and ``i+1`` carries
    ``mean(sqrt(det g) g^{aa}) / h_a`` times the tangential node weights.
    """
    node_w = _axis_node_weights(chart, bc)
    ginv = chart.inv_metric
    out = []
    for a, h in enumerate(chart.spacing):
        density = chart.metric_weight * ginv[..., a, a]
        lo = [slice(None)] * chart.dim
        hi = [slice(None)] * chart.dim
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        face = 0.5 * (density[tuple(lo)] + density[tuple(hi)]) / h
        tangential = [np.ones(1) if b == a else node_w[b] for b in range(chart.dim)]
        tangential[a] = np.ones(chart.full_shape[a] - 1)
        out.append(face * _outer(tangential))
    return out


def _face_differences(u_full: np.ndarray, axis: int) -> np.ndarray:
    return np.diff(u_full, axis=axis)


def _difference_matrix(chart: Chart, axis: int) -> sp.csr_matrix:
    mats = []
    for b, m in enumerate(chart.full_shape):
        if b == axis:
            mats.append(sp.diags([-np.ones(m - 1), np.ones(m - 1)], [0, 1], shape=(m - 1, m)))
        else:
            mats.append(sp.identity(m))
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m)
    return out.tocsr()


@dataclass(frozen=True, eq=False)
class Field:
    """Complex grid function on the unknown nodes of ``chart`` for ``bc``.

    ``bc_data`` is a full-grid array whose boundary entries hold the
    Dirichlet values (only used when ``bc == "dirichlet_data"``).
    """

    chart: Chart
    values: np.ndarray
    bc: str = "dirichlet_zero"
    bc_data: np.ndarray | None = None
    mean_zero: bool = False

    def __post_init__(self):
        _check_bc(self.bc)
        values = np.asarray(self.values, dtype=complex).reshape(-1)
        object.__setattr__(self, "values", values)
        expected = int(unknown_mask(self.chart, self.bc).sum())
        if values.size != expected:
            raise ValueError(
                f"field has {values.size} values, chart {self.chart!r} with bc={self.bc} "
                f"has {expected} unknown nodes"
            )
        if self.bc == "dirichlet_data":
            if self.bc_data is None:
                raise ValueError("dirichlet_data field needs bc_data")
            data = np.asarray(self.bc_data, dtype=complex)
            if data.shape != self.chart.full_shape:
                raise ValueError("bc_data must be a full-grid array")
            object.__setattr__(self, "bc_data", data)

    @classmethod
    def from_full(cls, chart: Chart, full: np.ndarray, bc: str = "dirichlet_zero", **kw) -> Field:
        full = np.asarray(full, dtype=complex)
        values = full[unknown_mask(chart, bc)]
        if bc == "dirichlet_data":
            kw.setdefault("bc_data", full)
        return cls(chart, values, bc, **kw)

    @classmethod
    def zeros(cls, chart: Chart, bc: str = "dirichlet_zero") -> Field:
        n = int(unknown_mask(chart, bc).sum())
        bc_data = np.zeros(chart.full_shape, dtype=complex) if bc == "dirichlet_data" else None
        return cls(chart, np.zeros(n, dtype=complex), bc, bc_data)

    def full(self) -> np.ndarray:
        """Values on the full grid with boundary data inserted."""
        if self.bc == "dirichlet_data":
            out = np.array(self.bc_data, dtype=complex)
        else:
            out = np.zeros(self.chart.full_shape, dtype=complex)
        out[unknown_mask(self.chart, self.bc)] = self.values
        if self.bc == "dirichlet_zero":
            out[self.chart.boundary_mask] = 0.0
        return out

    @property
    def weights(self) -> np.ndarray:
        return node_weights(self.chart, self.bc)

    @property
    def mean(self) -> complex:
        """Weighted mean over the unknown nodes."""
        w = self.weights
        return complex(np.dot(w, self.values) / w.sum())

    def with_values(self, values: np.ndarray, **kw) -> Field:
        return Field(self.chart, values, self.bc, self.bc_data, kw.get("mean_zero", self.mean_zero))


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Discrete ``-Delta_g + shift`` on the unknown nodes of a chart.

    Attributes
    ----------
    stiffness : csr_matrix
        Real symmetric ``K`` (unshifted), ``u^* K u`` is the discrete energy.
    mass : ndarray
        Lumped mass ``W`` on the unknown nodes.
    coupling : csr_matrix
        Rows of the full-grid stiffness for the unknown nodes, all columns;
        applies the stencil to a full-grid array including boundary values.
    """

    chart: Chart
    bc: str
    shift: float
    stiffness: sp.csr_matrix
    mass: np.ndarray
    coupling: sp.csr_matrix

    @property
    def size(self) -> int:
        return self.mass.size

    @cached_property
    def shifted_stiffness(self) -> sp.csr_matrix:
        if self.shift == 0.0:
            return self.stiffness
        return (self.stiffness + sp.diags(self.shift * self.mass)).tocsr()

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """``A = W^{-1} (K + shift W)``."""
        return (sp.diags(1.0 / self.mass) @ self.shifted_stiffness).tocsr()

    @cached_property
    def symmetric_matrix(self) -> sp.csr_matrix:
        """``W^{-1/2} (K + shift W) W^{-1/2}``, unitarily similar to ``A``."""
        s = sp.diags(1.0 / np.sqrt(self.mass))
        return (s @ self.shifted_stiffness @ s).tocsr()

    def apply(self, values: np.ndarray) -> np.ndarray:
        """``A u`` for ``u`` on the unknown nodes (zero boundary values)."""
        values = np.asarray(values)
        return self.shifted_stiffness @ values / self.mass

    def apply_full(self, full: np.ndarray) -> np.ndarray:
        """``A u`` at the unknown nodes for a full-grid ``u`` with boundary values."""
        flat = np.asarray(full).reshape(-1)
        mask = unknown_mask(self.chart, self.bc).reshape(-1)
        out = self.coupling @ flat / self.mass
        if self.shift:
            out = out + self.shift * flat[mask]
        return out

    def energy(self, values: np.ndarray) -> float:
        """``u^* (K + shift W) u`` for values on the unknown nodes."""
        values = np.asarray(values)
        return float(np.real(np.vdot(values, self.shifted_stiffness @ values)))

    @property
    def inf_norm(self) -> float:
        return float(abs(self.matrix).sum(axis=1).max())


def assemble_operator(chart: Chart, bc: str = "dirichlet_zero", shift: float = 0.0) -> DiscreteOperator:
    """Assemble ``-Delta_g + shift`` in flux form.

    Dirichlet rows are eliminated; Neumann boundary rows come out as the
    ghost-reflection stencil, so constants lie in the kernel.

    >>> from elliptic_picard.grid import build_interval_grid
    >>> assemble_operator(build_interval_grid(1, 1.0)).matrix.toarray()
    array([[8.]])
    """
    _check_bc(bc)
    shift = float(shift)
    if not np.isfinite(shift) or shift < 0.0:
        raise ValueError("shift must be a nonnegative real")
    coeffs = _face_coefficients(chart, bc)
    k_full = None
    for a, c in enumerate(coeffs):
        d = _difference_matrix(chart, a)
        term = d.T @ sp.diags(c.reshape(-1)) @ d
        k_full = term if k_full is None else k_full + term
    k_full = k_full.tocsr()
    idx = np.flatnonzero(unknown_mask(chart, bc).reshape(-1))
    coupling = k_full[idx, :].tocsr()
    stiffness = coupling[:, idx].tocsr()
    stiffness.sort_indices()
    mass = node_weights(chart, bc)
    return DiscreteOperator(chart, bc, shift, stiffness, mass, coupling)


def _same_space(chart: Chart, u: Field, v: Field):
    if u.chart != chart or v.chart != chart:
        raise ValueError("fields live on a different chart")
    if (u.bc == "neumann") != (v.bc == "neumann"):
        raise ValueError("cannot pair a Neumann field with a Dirichlet field")


def inner_product(chart: Chart, u: Field, v: Field, kind: str = "l2") -> complex:
    """Discrete ``<u, v>`` (linear in ``u``, antilinear in ``v``).

    ``energy`` is computed from face differences of the full-grid values,
    independently of the assembled stiffness matrix.
    """
    if kind not in INNER_PRODUCT_KINDS:
        raise ValueError(f"unknown inner product {kind!r}")
    _same_space(chart, u, v)
    total = 0j
    if kind in ("l2", "h1"):
        total += np.sum(u.weights * u.values * np.conj(v.values))
    if kind in ("energy", "h1"):
        uf, vf = u.full(), v.full()
        bc = "neumann" if u.bc == "neumann" else "dirichlet_zero"
        for a, c in enumerate(_face_coefficients(chart, bc)):
            total += np.sum(c * _face_differences(uf, a) * np.conj(_face_differences(vf, a)))
    return complex(total)


def norm(chart: Chart, u: Field, kind: str = "l2") -> float:
    return float(np.sqrt(max(inner_product(chart, u, u, kind).real, 0.0)))


def gradient(chart: Chart, u: Field) -> np.ndarray:
    """Centered-difference gradient at the unknown nodes, shape ``(N, dim)``.

    Boundary values come from ``u.bc_data`` (or zero); on Neumann boundary
    nodes the ghost reflection makes the normal component vanish.
    """
    if u.chart != chart:
        raise ValueError("field lives on a different chart")
    full = u.full()
    neumann = u.bc == "neumann"
    # Neumann: pad with the ghost reflection so every full-grid node gets a
    # centered difference.  Dirichlet: only interior nodes are unknowns.
    padded = np.pad(full, 1, mode="reflect") if neumann else full
    inner = [slice(1, -1)] * chart.dim
    comps = []
    for a, h in enumerate(chart.spacing):
        fwd, bwd = list(inner), list(inner)
        fwd[a] = slice(2, None)
        bwd[a] = slice(None, -2)
        # the result covers exactly the unknown nodes, in C order
        comps.append(((padded[tuple(fwd)] - padded[tuple(bwd)]) / (2 * h)).reshape(-1))
    return np.stack(comps, axis=-1)


def weighted_mean(values: np.ndarray, weights: np.ndarray) -> complex:
    return complex(np.dot(weights, values) / weights.sum())


def project_mean_zero(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return np.asarray(values, dtype=complex) - weighted_mean(values, weights)


def write_matrix_market(op: DiscreteOperator, path) -> None:
    """Dump ``A`` in Matrix Market coordinate format (debugging aid)."""
    scipy.io.mmwrite(str(path), op.matrix, comment=f"{op.chart!r} bc={op.bc} shift={op.shift}")
