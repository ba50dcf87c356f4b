import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elliptic_picard.nonlinear import Nonlinearity, sample_lipschitz, sample_lipschitz_grad

CATALOG = [
    Nonlinearity.phase(0.7),
    Nonlinearity.sine_real(1.3),
    Nonlinearity.saturating(2.0),
    Nonlinearity.modulus_type(0.4),
    Nonlinearity.linear(0.5 - 1.5j),
    Nonlinearity.zero(),
]


def test_catalog_values():
    z = np.array([0.0, 1.0 + 2.0j, -3.0j])
    np.testing.assert_allclose(Nonlinearity.phase(2.0)(z), 2.0 * np.exp(1j * z.imag))
    np.testing.assert_allclose(Nonlinearity.sine_real(2.0)(z), 2.0 * np.sin(z.real))
    np.testing.assert_allclose(Nonlinearity.saturating(2.0)(z), 2.0 * z / (1 + abs(z)))
    np.testing.assert_allclose(Nonlinearity.modulus_type(2.0)(z), 2.0 * z / (1 + abs(z) ** 2))
    np.testing.assert_allclose(Nonlinearity.linear(1j)(z), 1j * z)
    np.testing.assert_array_equal(Nonlinearity.zero()(z), 0)


def test_declared_constants():
    assert Nonlinearity.phase(0.5).declared_c1 == pytest.approx(0.5 * math.sqrt(2))
    assert Nonlinearity.linear(3 - 4j).declared_c1 == pytest.approx(5.0)
    assert Nonlinearity.saturating(-2.0).declared_c1 == 2.0
    nl = Nonlinearity.zero().with_linear_combo([3.0, 4.0])
    assert nl.declared_c2(2) == pytest.approx(5.0)
    assert Nonlinearity.zero().with_saturating_grad(0.5).declared_c2(2) == pytest.approx(0.5 * math.sqrt(2))
    assert Nonlinearity.phase(1.0).declared_c2(3) == 0.0
    assert Nonlinearity("saturating", 1.0, c1=1.5).declared_c1 == 1.5


def test_normalized_vanishes_at_zero():
    nl = Nonlinearity.phase(1.5)
    assert nl.at_zero == 1.5
    assert Nonlinearity.phase(1.5).normalized().at_zero == 0
    z = np.array([0.3 + 0.2j, -1.0j])
    np.testing.assert_allclose(nl.normalized()(z), nl(z) - 1.5)


def test_gradient_terms():
    g = np.array([[1.0, -2.0j], [0.0, 0.0]])
    nl = Nonlinearity.zero().with_linear_combo([2.0, 1j])
    np.testing.assert_allclose(nl.grad_value(g), [2.0 + 2.0, 0.0])
    sat = Nonlinearity.zero().with_saturating_grad(3.0)
    np.testing.assert_allclose(sat.grad_value(g), [3.0 * (0.5 - 2j / 3), 0.0])
    with pytest.raises(ValueError, match="coefficients"):
        nl.grad_value(np.ones((2, 3)))
    assert np.all(Nonlinearity.zero().grad_value(g) == 0)


@pytest.mark.parametrize(
    "kwargs",
    [dict(kind="cubic"), dict(kind="phase", alpha=1j), dict(grad_kind="laplace"), dict(grad_kind="linear_combo"),
     dict(kind="linear", alpha=1.0, c1=-1.0)],
)
def test_invalid(kwargs):
    with pytest.raises(ValueError):
        Nonlinearity(**kwargs)


@given(
    st.sampled_from(["phase", "sine_real", "saturating", "modulus_type", "linear", "zero"]),
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.lists(st.floats(-3, 3), min_size=1, max_size=3),
)
def test_dict_roundtrip(kind, a, b, coeffs):
    alpha = complex(a, b) if kind == "linear" else (0.0 if kind == "zero" else a)
    nl = Nonlinearity(kind, alpha).with_linear_combo(coeffs)
    assert Nonlinearity.from_dict(nl.to_dict()) == nl


def test_sample_linear_is_exact():
    a = 0.5 - 2j
    assert sample_lipschitz(Nonlinearity.linear(a), 1000, 3.0) == pytest.approx(abs(a), abs=1e-12)
    assert sample_lipschitz(Nonlinearity.zero(), 100, 3.0) == 0.0


@pytest.mark.parametrize("nl", CATALOG, ids=lambda n: n.kind)
def test_sampling_never_exceeds_declared(nl):
    assert sample_lipschitz(nl, 20_000, 10.0) <= nl.declared_c1 * (1 + 1e-9) + 1e-15


@given(st.floats(0.01, 20.0), st.integers(0, 1000))
def test_sampling_bounded_for_any_alpha(alpha, seed):
    for nl in (Nonlinearity.phase(alpha), Nonlinearity.saturating(alpha), Nonlinearity.modulus_type(alpha)):
        assert sample_lipschitz(nl, 500, 5.0, seed) <= nl.declared_c1 * (1 + 1e-9)


def test_phase_sharp_constant_is_one():
    # |exp(iy) - exp(iy')| <= |y - y'|: the sampled ratio approaches 1, not sqrt(2)
    est = sample_lipschitz(Nonlinearity.phase(1.0), 100_000, 10.0)
    assert 0.999 < est <= 1.0 + 1e-12


def test_sample_gradient_constants():
    nl = Nonlinearity.zero().with_linear_combo([0.3, 0.4])
    assert sample_lipschitz_grad(nl, 2, 2000, 5.0) == pytest.approx(0.5, rel=1e-3)
    sat = Nonlinearity.zero().with_saturating_grad(1.0)
    assert sample_lipschitz_grad(sat, 2, 2000, 5.0) <= sat.declared_c2(2)
    assert sample_lipschitz_grad(Nonlinearity.phase(1.0), 2) == 0.0
