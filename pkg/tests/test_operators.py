import math

import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp
from conftest import random_complex
from hypothesis import given
from hypothesis import strategies as st

from elliptic_picard.grid import build_interval_grid, build_metric_band, build_rectangle_grid
from elliptic_picard.operators import (
    Field,
    assemble_operator,
    gradient,
    inner_product,
    norm,
    project_mean_zero,
    write_matrix_market,
)


def tridiag(n, h):
    return sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).toarray() / h**2


def test_single_interior_node():
    op = assemble_operator(build_interval_grid(1, 1.0))
    np.testing.assert_array_equal(op.matrix.toarray(), [[8.0]])


def test_interval_dirichlet_is_three_point_stencil():
    chart = build_interval_grid(9, 2.0)
    op = assemble_operator(chart)
    np.testing.assert_allclose(op.matrix.toarray(), tridiag(9, chart.spacing[0]), rtol=1e-14)


def test_rectangle_is_kronecker_sum():
    chart = build_rectangle_grid(5, 4, 1.0, 2.0)
    hx, hy = chart.spacing
    expected = np.kron(tridiag(5, hx), np.eye(4)) + np.kron(np.eye(5), tridiag(4, hy))
    np.testing.assert_allclose(assemble_operator(chart).matrix.toarray(), expected, rtol=1e-13)


def test_neumann_ghost_rows_and_constant_kernel():
    chart = build_interval_grid(7)
    h = chart.spacing[0]
    a = assemble_operator(chart, "neumann").matrix.toarray()
    np.testing.assert_allclose(a[0, :2], [2 / h**2, -2 / h**2])
    np.testing.assert_allclose(a[-1, -2:], [-2 / h**2, 2 / h**2])
    np.testing.assert_allclose(a @ np.ones(a.shape[0]), 0.0, atol=1e-9)


@pytest.mark.parametrize(
    "chart",
    [build_interval_grid(12), build_rectangle_grid(6, 5), build_metric_band(11, 0.3, 2.0)],
    ids=["interval", "rectangle", "band"],
)
@pytest.mark.parametrize("bc", ["dirichlet_zero", "neumann"])
def test_stiffness_symmetric_and_similar_form_hermitian(chart, bc):
    op = assemble_operator(chart, bc, shift=0.7)
    k = op.stiffness.toarray()
    np.testing.assert_array_equal(k, k.T)
    s = op.symmetric_matrix.toarray()
    np.testing.assert_allclose(s, s.conj().T, rtol=1e-13, atol=1e-12)


def test_band_operator_second_order_on_zonal_harmonic():
    # -Delta_g cos(theta) = 2 cos(theta); the lifted stencil error should drop by 4
    errs = []
    for n in (31, 63, 127):
        chart = build_metric_band(n, math.pi / 6, math.pi / 2)
        op = assemble_operator(chart, "dirichlet_data")
        u = np.cos(chart.coords[..., 0])
        err = op.apply_full(u) - 2 * np.cos(chart.interior_coords[:, 0])
        errs.append(np.max(np.abs(err)))
    assert 3.5 < errs[0] / errs[1] < 4.5
    assert 3.5 < errs[1] / errs[2] < 4.5


def test_apply_full_annihilates_linear_functions():
    chart = build_rectangle_grid(6, 7)
    op = assemble_operator(chart, "dirichlet_data")
    x = chart.coords
    u = 2.0 * x[..., 0] - 3.0 * x[..., 1] + 1.0
    np.testing.assert_allclose(op.apply_full(u), 0.0, atol=1e-10)


def test_shift_adds_identity():
    chart = build_interval_grid(6)
    a0 = assemble_operator(chart).matrix.toarray()
    a1 = assemble_operator(chart, shift=2.5).matrix.toarray()
    np.testing.assert_allclose(a1 - a0, 2.5 * np.eye(6), atol=1e-12)


@pytest.mark.parametrize("shift", [-1.0, float("nan")])
def test_bad_shift(shift):
    with pytest.raises(ValueError):
        assemble_operator(build_interval_grid(3), shift=shift)


def test_unknown_bc():
    with pytest.raises(ValueError, match="boundary condition"):
        assemble_operator(build_interval_grid(3), "robin")


@given(st.integers(0, 2**31 - 1), st.sampled_from(["dirichlet_zero", "neumann"]))
def test_energy_matches_face_sum(seed, bc):
    # inner_product("energy") sums face differences; op.energy uses K
    rng = np.random.default_rng(seed)
    chart = build_metric_band(13, 0.4, 2.2) if seed % 2 else build_rectangle_grid(5, 6)
    op = assemble_operator(chart, bc)
    u = Field(chart, random_complex(rng, op.size), bc)
    e = inner_product(chart, u, u, "energy")
    assert abs(e.imag) <= 1e-12 * abs(e)
    assert math.isclose(e.real, op.energy(u.values), rel_tol=1e-12)
    assert e.real >= 0


@given(st.integers(0, 2**31 - 1))
def test_inner_product_hermitian_symmetry(seed):
    rng = np.random.default_rng(seed)
    chart = build_interval_grid(10)
    u = Field(chart, random_complex(rng, 10))
    v = Field(chart, random_complex(rng, 10))
    for kind in ("l2", "energy", "h1"):
        uv = inner_product(chart, u, v, kind)
        vu = inner_product(chart, v, u, kind)
        assert abs(uv - vu.conjugate()) <= 1e-12 * max(1.0, abs(uv))
    h1 = norm(chart, u, "h1") ** 2
    assert math.isclose(h1, norm(chart, u, "l2") ** 2 + norm(chart, u, "energy") ** 2, rel_tol=1e-12)


def test_neumann_mass_integrates_constants_exactly():
    chart = build_rectangle_grid(7, 4, 2.0, 3.0)
    one = Field(chart, np.ones(chart.n_full), "neumann")
    assert math.isclose(inner_product(chart, one, one).real, 6.0, rel_tol=1e-14)


def test_gradient_of_linear_field():
    chart = build_rectangle_grid(5, 6)
    x = chart.coords
    full = 3.0 * x[..., 0] - 2.0 * x[..., 1]
    g = gradient(chart, Field.from_full(chart, full, "dirichlet_data"))
    np.testing.assert_allclose(g, np.tile([3.0, -2.0], (30, 1)), atol=1e-12)


def test_neumann_gradient_normal_component_vanishes():
    chart = build_interval_grid(9)
    u = Field(chart, np.cos(np.pi * chart.axes[0]) + 0.3 * chart.axes[0] ** 2, "neumann")
    g = gradient(chart, u)
    assert g.shape == (11, 1)
    assert g[0, 0] == 0 and g[-1, 0] == 0


def test_field_validation():
    chart = build_interval_grid(4)
    with pytest.raises(ValueError, match="unknown nodes"):
        Field(chart, np.zeros(6))
    with pytest.raises(ValueError, match="bc_data"):
        Field(chart, np.zeros(4), "dirichlet_data")
    with pytest.raises(ValueError):
        inner_product(chart, Field(chart, np.zeros(4)), Field(chart, np.zeros(6), "neumann"))


def test_field_full_inserts_boundary_data():
    chart = build_interval_grid(3)
    data = np.array([1.0, 0, 0, 0, 2.0j])
    f = Field(chart, [5, 6, 7], "dirichlet_data", data)
    np.testing.assert_array_equal(f.full(), [1, 5, 6, 7, 2j])


def test_project_mean_zero():
    w = np.array([0.5, 1.0, 1.0, 0.5])
    v = project_mean_zero(np.array([1.0, 2.0, 3.0, 4.0j]), w)
    assert abs(np.dot(w, v)) < 1e-15


def test_matrix_market_roundtrip(tmp_path):
    op = assemble_operator(build_rectangle_grid(3, 4), "neumann", 1.0)
    path = tmp_path / "a.mtx"
    write_matrix_market(op, path)
    back = scipy.io.mmread(str(path)).toarray()
    np.testing.assert_allclose(back, op.matrix.toarray(), rtol=1e-15)
