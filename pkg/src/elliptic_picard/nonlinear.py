"""
Catalog of globally Lipschitz nonlinearities ``F(u) + F2(grad u)``.

==================  ==============================  ==================
kind                map                             Lipschitz constant
==================  ==============================  ==================
``zero``            0                               0
``linear``          a z                             abs(a)
``phase``           alpha exp(i Im z)               alpha sqrt(2)
``sine_real``       alpha sin(Re z)                 alpha
``saturating``      alpha z / (1 + abs(z))          alpha
``modulus_type``    alpha z / (1 + abs(z)^2)        alpha
==================  ==============================  ==================

Gradient terms: ``linear_combo`` is ``b . grad u`` with constant ``|b|_2``;
``saturating_grad`` is ``alpha sum_j d_j u / (1 + |d_j u|)`` with constant
``alpha sqrt(dim)``.

The constant quoted for ``phase`` is the customary ``sqrt(2)`` bound.  It
is a valid upper bound but not sharp: ``|exp(iy) - exp(iy')| <= |y - y'|``
so the map is in fact 1-Lipschitz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

F_KINDS = ("zero", "linear", "phase", "sine_real", "saturating", "modulus_type")
GRAD_KINDS = ("none", "linear_combo", "saturating_grad")


@dataclass(frozen=True)
class Nonlinearity:
    """``F(z) + constant`` plus an optional gradient term ``F2``.

    ``c1`` / ``c2`` override the catalog Lipschitz constants; leave them as
    ``None`` to use the catalog values.
    """

    kind: str = "zero"
    alpha: complex = 0.0
    grad_kind: str = "none"
    grad_coeffs: tuple[complex, ...] = ()
    grad_alpha: float = 0.0
    constant: complex = 0.0
    c1: float | None = None
    c2: float | None = None

    def __post_init__(self):
        if self.kind not in F_KINDS:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        if self.grad_kind not in GRAD_KINDS:
            raise ValueError(f"unknown gradient nonlinearity {self.grad_kind!r}")
        if self.kind not in ("zero", "linear") and complex(self.alpha).imag != 0.0:
            raise ValueError(f"{self.kind} takes a real alpha")
        object.__setattr__(self, "grad_coeffs", tuple(complex(b) for b in self.grad_coeffs))
        if self.grad_kind == "linear_combo" and not self.grad_coeffs:
            raise ValueError("linear_combo needs coefficients b")
        for name in ("c1", "c2"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"declared {name} must be nonnegative")

    # constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> Nonlinearity:
        return cls()

    @classmethod
    def linear(cls, a: complex) -> Nonlinearity:
        return cls("linear", complex(a))

    @classmethod
    def phase(cls, alpha: float) -> Nonlinearity:
        return cls("phase", float(alpha))

    @classmethod
    def sine_real(cls, alpha: float) -> Nonlinearity:
        return cls("sine_real", float(alpha))

    @classmethod
    def saturating(cls, alpha: float) -> Nonlinearity:
        return cls("saturating", float(alpha))

    @classmethod
    def modulus_type(cls, alpha: float) -> Nonlinearity:
        return cls("modulus_type", float(alpha))

    def with_linear_combo(self, b) -> Nonlinearity:
        return replace(self, grad_kind="linear_combo", grad_coeffs=tuple(np.atleast_1d(b)))

    def with_saturating_grad(self, alpha: float) -> Nonlinearity:
        return replace(self, grad_kind="saturating_grad", grad_alpha=float(alpha))

    # evaluation ---------------------------------------------------------

    def value(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        a = complex(self.alpha)
        if self.kind == "zero":
            out = np.zeros_like(z)
        elif self.kind == "linear":
            out = a * z
        elif self.kind == "phase":
            out = a.real * np.exp(1j * z.imag)
        elif self.kind == "sine_real":
            out = a.real * np.sin(z.real) + 0j
        elif self.kind == "saturating":
            out = a.real * z / (1.0 + np.abs(z))
        else:
            out = a.real * z / (1.0 + np.abs(z) ** 2)
        return out + self.constant

    __call__ = value

    def grad_value(self, g) -> np.ndarray:
        """``F2`` at gradient samples of shape ``(N, dim)``."""
        g = np.asarray(g, dtype=complex)
        if self.grad_kind == "none":
            return np.zeros(g.shape[:-1], dtype=complex)
        if self.grad_kind == "linear_combo":
            b = np.asarray(self.grad_coeffs)
            if b.size != g.shape[-1]:
                raise ValueError(f"linear_combo has {b.size} coefficients for a {g.shape[-1]}D gradient")
            return g @ b
        return self.grad_alpha * np.sum(g / (1.0 + np.abs(g)), axis=-1)

    @property
    def has_gradient_term(self) -> bool:
        return self.grad_kind != "none"

    @property
    def at_zero(self) -> complex:
        return complex(self.value(0j))

    def normalized(self) -> Nonlinearity:
        """Same map shifted so that ``F(0) = 0``."""
        return replace(self, constant=self.constant - self.at_zero)

    # Lipschitz constants ------------------------------------------------

    @property
    def declared_c1(self) -> float:
        if self.c1 is not None:
            return float(self.c1)
        if self.kind == "zero":
            return 0.0
        if self.kind == "phase":
            return abs(complex(self.alpha)) * math.sqrt(2.0)
        return abs(complex(self.alpha))

    def declared_c2(self, dim: int = 1) -> float:
        if self.c2 is not None:
            return float(self.c2)
        if self.grad_kind == "none":
            return 0.0
        if self.grad_kind == "linear_combo":
            return float(np.linalg.norm(np.asarray(self.grad_coeffs)))
        return abs(self.grad_alpha) * math.sqrt(dim)

    # serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        a = complex(self.alpha)
        if self.kind == "linear":
            out["a"] = [a.real, a.imag]
        elif self.kind != "zero":
            out["alpha"] = a.real
        if self.grad_kind == "linear_combo":
            out["grad_kind"] = "linear_combo"
            out["b"] = [[b.real, b.imag] for b in self.grad_coeffs]
        elif self.grad_kind == "saturating_grad":
            out["grad_kind"] = "saturating_grad"
            out["grad_alpha"] = self.grad_alpha
        if self.constant:
            c = complex(self.constant)
            out["constant"] = [c.real, c.imag]
        if self.c1 is not None:
            out["c1"] = self.c1
        if self.c2 is not None:
            out["c2"] = self.c2
        return out

    @classmethod
    def from_dict(cls, desc: dict) -> Nonlinearity:
        kind = desc.get("kind", "zero")
        if kind == "linear":
            alpha = _complex(desc.get("a", 0.0))
        else:
            alpha = float(desc.get("alpha", 0.0))
        grad_kind = desc.get("grad_kind", "none")
        return cls(
            kind=kind,
            alpha=alpha,
            grad_kind=grad_kind,
            grad_coeffs=tuple(_complex(b) for b in desc.get("b", ())),
            grad_alpha=float(desc.get("grad_alpha", 0.0)),
            constant=_complex(desc.get("constant", 0.0)),
            c1=desc.get("c1"),
            c2=desc.get("c2"),
        )


def _complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        re, im = x
        return complex(re, im)
    return complex(x)


def _log_uniform(rng, size, lo, hi):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def _random_directions(rng, shape):
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    norms = np.sqrt(np.sum(np.abs(z) ** 2, axis=-1, keepdims=True)) if z.ndim > 1 else np.abs(z)
    return z / norms


def sample_lipschitz(nl: Nonlinearity, n_samples: int = 4096, radius: float = 10.0, seed: int = 0) -> float:
    """Largest observed ``|F(z) - F(w)| / |z - w|`` over random pairs.

    Base points are uniform in the complex disc of ``radius``; partners are
    offset by log-uniform distances between ``1e-3 radius`` and ``2 radius``
    so both the local slope and large jumps get probed.  Ratios use the
    difference ``w - z`` as actually stored, and the smallest step keeps the
    rounding error of a ratio near ``1e-13``.  The result is a lower bound
    for the true constant.
    """
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(size=n_samples))
    z = r * np.exp(2j * np.pi * rng.uniform(size=n_samples))
    step = _log_uniform(rng, n_samples, 1e-3 * radius, 2.0 * radius)
    w = z + step * _random_directions(rng, n_samples)
    num = np.abs(nl.value(z) - nl.value(w))
    return float(np.max(num / np.abs(w - z)))


def sample_lipschitz_grad(
    nl: Nonlinearity, dim: int, n_samples: int = 4096, radius: float = 10.0, seed: int = 0
) -> float:
    """Sampled Lipschitz ratio of ``F2`` on ``C^dim`` (Euclidean norm)."""
    if not nl.has_gradient_term:
        return 0.0
    rng = np.random.default_rng(seed)
    g = radius * rng.uniform(-1, 1, (n_samples, dim)) + 1j * radius * rng.uniform(-1, 1, (n_samples, dim))
    step = _log_uniform(rng, n_samples, 1e-3 * radius, 2.0 * radius)[:, None]
    d = step * _random_directions(rng, (n_samples, dim))
    d = (g + d) - g
    num = np.abs(nl.grad_value(g) - nl.grad_value(g + d))
    den = np.sqrt(np.sum(np.abs(d) ** 2, axis=-1))
    return float(np.max(num / den))
