import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elliptic_picard.grid import (
    build_circle_arc,
    build_circle_cover,
    build_interval_grid,
    build_metric_band,
    build_rectangle_grid,
    chart_from_dict,
)


def test_interval_single_node():
    chart = build_interval_grid(1, 1.0)
    assert chart.spacing == (0.5,)
    assert chart.full_shape == (3,)
    np.testing.assert_array_equal(chart.boundary_mask, [True, False, True])
    np.testing.assert_allclose(chart.interior_coords[:, 0], [0.5])


@given(st.integers(1, 2000), st.floats(0.1, 50.0))
def test_interval_spacing_covers_length(n, length):
    chart = build_interval_grid(n, length)
    assert math.isclose(chart.spacing[0] * (n + 1), length, rel_tol=1e-12)
    assert chart.axes[0][0] == 0.0
    assert math.isclose(chart.axes[0][-1], length, rel_tol=1e-12)


def test_rectangle_boundary_count():
    chart = build_rectangle_grid(4, 3, 2.0, 1.0)
    assert chart.full_shape == (6, 5)
    assert chart.boundary_mask.sum() == 6 * 5 - 4 * 3
    assert chart.n_interior == 12
    assert chart.coords.shape == (6, 5, 2)


@pytest.mark.parametrize("n", [0, -1, 2.5])
def test_bad_counts_rejected(n):
    with pytest.raises(ValueError):
        build_interval_grid(n)


def test_band_weight_is_sine():
    chart = build_metric_band(31, math.pi / 6, math.pi / 2)
    np.testing.assert_allclose(chart.metric_weight, np.sin(chart.axes[0]))


@pytest.mark.parametrize("lo,hi", [(0.0, 1.0), (1.0, math.pi), (1.0, 0.5)])
def test_band_rejects_poles_and_empty_ranges(lo, hi):
    with pytest.raises(ValueError):
        build_metric_band(15, lo, hi)


def test_chart_dict_roundtrip_and_equality():
    for chart in (build_interval_grid(7, 2.0), build_rectangle_grid(3, 5), build_metric_band(9, 0.5, 1.5)):
        again = chart_from_dict(chart.to_dict())
        assert again == chart
        assert hash(again) == hash(chart)
    assert build_interval_grid(7) != build_interval_grid(8)


def test_circle_arc_wraps():
    arc = build_circle_arc(-3, 10, 64)
    assert arc.kind == "circle_arc"
    assert math.isclose(arc.spacing[0], 2 * math.pi / 64)


class TestCircleCover:
    cover = build_circle_cover(256, 0.1)

    def test_partition_of_unity(self):
        np.testing.assert_allclose(self.cover.chi.sum(axis=0), 1.0, atol=1e-15)
        assert np.all(self.cover.chi >= 0)

    def test_chi_supported_in_its_arc(self):
        for i in range(2):
            outside = ~self.cover.support_mask(i)
            assert np.all(self.cover.chi[i][outside] == 0.0)

    def test_bump_has_unit_mass_inside_overlap(self):
        c = self.cover
        assert math.isclose(c.sigma.sum() * c.spacing, 1.0, rel_tol=1e-14)
        inside = np.zeros(c.n, dtype=bool)
        inside[c.overlap] = True
        assert np.all(c.sigma[~inside] == 0.0)

    def test_arcs_cover_circle(self):
        covered = self.cover.support_mask(0) | self.cover.support_mask(1)
        assert covered.all()

    def test_arc_length(self):
        # each arc spans pi (1 + 2 delta) up to rounding to whole cells
        for nodes in self.cover.arc_nodes:
            span = (nodes.size - 1) * self.cover.spacing
            assert abs(span - math.pi * 1.2) <= self.cover.spacing

    @pytest.mark.parametrize("n,delta", [(255, 0.1), (16, 0.05), (64, 0.6), (64, 0.0)])
    def test_invalid_covers(self, n, delta):
        with pytest.raises(ValueError):
            build_circle_cover(n, delta)
