"""
Uniform grids and metric charts.

Every chart is a tensor-product grid of ``n + 2`` nodes per axis: ``n``
interior nodes and one boundary node at each end.  Arrays described as
"full grid" have shape ``chart.full_shape`` and include the boundary nodes.

The only curved chart is the axisymmetric band of the unit sphere,
parametrized by the polar angle.  For zonal functions the Laplace-Beltrami
operator reduces to ``(1/sin t) d/dt (sin t du/dt)``, so the band is a 1D
chart with volume weight ``sqrt(det g) = sin t`` and ``g^{tt} = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral, Real

import numpy as np

CHART_KINDS = ("interval", "rectangle", "metric_band", "circle_arc")


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_count(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def _check_length(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ValueError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True, eq=False)
class Chart:
    """A discretized domain.

    Attributes
    ----------
    kind : str
        One of ``CHART_KINDS``.
    shape : tuple of int
        Interior node count per axis.
    spacing : tuple of float
        Grid spacing per axis.
    axes : tuple of ndarray
        Node coordinates per axis, boundary nodes included.
    metric_weight : ndarray
        ``sqrt(det g)`` on the full grid (ones on flat charts).
    params : dict
        Constructor arguments, used for JSON round trips.
    """

    kind: str
    shape: tuple[int, ...]
    spacing: tuple[float, ...]
    axes: tuple[np.ndarray, ...]
    metric_weight: np.ndarray
    params: dict

    def __post_init__(self):
        if self.kind not in CHART_KINDS:
            raise ValueError(f"unknown chart kind {self.kind!r}")
        if any(h <= 0.0 for h in self.spacing):
            raise ValueError("grid spacing must be strictly positive")
        if self.metric_weight.shape != self.full_shape:
            raise ValueError("metric_weight must live on the full grid")
        if not np.all(self.metric_weight > 0.0):
            raise ValueError("metric weight must be positive at every node")

    def __eq__(self, other):
        if not isinstance(other, Chart):
            return NotImplemented
        return self.kind == other.kind and self.params == other.params

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"Chart({self.kind}: {args})"

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def full_shape(self) -> tuple[int, ...]:
        return tuple(n + 2 for n in self.shape)

    @property
    def n_interior(self) -> int:
        return int(np.prod(self.shape))

    @property
    def n_full(self) -> int:
        return int(np.prod(self.full_shape))

    @property
    def coords(self) -> np.ndarray:
        """Full-grid node coordinates, shape ``full_shape + (dim,)``."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    @property
    def boundary_mask(self) -> np.ndarray:
        """True on boundary nodes of the full grid."""
        mask = np.zeros(self.full_shape, dtype=bool)
        for axis in range(self.dim):
            index = [slice(None)] * self.dim
            index[axis] = 0
            mask[tuple(index)] = True
            index[axis] = -1
            mask[tuple(index)] = True
        return mask

    @property
    def interior_coords(self) -> np.ndarray:
        return self.coords[~self.boundary_mask]

    @property
    def inv_metric(self) -> np.ndarray:
        """``g^{ij}`` on the full grid, shape ``full_shape + (dim, dim)``.

        Every chart kind built here has an identity inverse metric in its
        coordinates; the band's curvature enters only through the volume
        weight.
        """
        eye = np.eye(self.dim)
        return np.broadcast_to(eye, self.full_shape + (self.dim, self.dim))

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(float(ax[-1] - ax[0]) for ax in self.axes)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}


def build_interval_grid(n_interior: int, length: float = 1.0) -> Chart:
    """Uniform grid on ``(0, length)`` with ``h = length / (n_interior + 1)``."""
    n = _check_count("n_interior", n_interior)
    length = _check_length("length", length)
    x = np.linspace(0.0, length, n + 2)
    return Chart(
        kind="interval",
        shape=(n,),
        spacing=(length / (n + 1),),
        axes=(_readonly(x),),
        metric_weight=_readonly(np.ones(n + 2)),
        params={"n": n, "length": length},
    )


def build_rectangle_grid(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0) -> Chart:
    nx = _check_count("nx", nx)
    ny = _check_count("ny", ny)
    lx = _check_length("lx", lx)
    ly = _check_length("ly", ly)
    return Chart(
        kind="rectangle",
        shape=(nx, ny),
        spacing=(lx / (nx + 1), ly / (ny + 1)),
        axes=(_readonly(np.linspace(0.0, lx, nx + 2)), _readonly(np.linspace(0.0, ly, ny + 2))),
        metric_weight=_readonly(np.ones((nx + 2, ny + 2))),
        params={"nx": nx, "ny": ny, "lx": lx, "ly": ly},
    )


def build_metric_band(n: int, theta_min: float, theta_max: float) -> Chart:
    """Zonal band ``theta_min < theta < theta_max`` of the unit sphere.

    Poles are rejected: the weight ``sin theta`` vanishes there and the
    chart degenerates.
    """
    n = _check_count("n", n)
    theta_min = float(theta_min)
    theta_max = float(theta_max)
    if not (0.0 < theta_min < theta_max < math.pi):
        raise ValueError(
            "metric band needs 0 < theta_min < theta_max < pi "
            f"(got [{theta_min}, {theta_max}]); bands touching a pole are singular"
        )
    theta = np.linspace(theta_min, theta_max, n + 2)
    return Chart(
        kind="metric_band",
        shape=(n,),
        spacing=((theta_max - theta_min) / (n + 1),),
        axes=(_readonly(theta),),
        metric_weight=_readonly(np.sin(theta)),
        params={"n": n, "theta_min": theta_min, "theta_max": theta_max},
    )


def build_circle_arc(start_index: int, n_interior: int, n_circle: int) -> Chart:
    """Arc of the unit circle discretized with ``n_circle`` equispaced nodes.

    The arc's boundary nodes sit at global indices ``start_index`` and
    ``start_index + n_interior + 1`` (angles are not wrapped).
    """
    n = _check_count("n_interior", n_interior)
    n_circle = _check_count("n_circle", n_circle)
    h = 2.0 * math.pi / n_circle
    theta = (start_index + np.arange(n + 2)) * h
    return Chart(
        kind="circle_arc",
        shape=(n,),
        spacing=(h,),
        axes=(_readonly(theta),),
        metric_weight=_readonly(np.ones(n + 2)),
        params={"start_index": int(start_index), "n_interior": n, "n_circle": n_circle},
    )


def chart_from_dict(desc: dict) -> Chart:
    """Inverse of :meth:`Chart.to_dict`."""
    desc = dict(desc)
    kind = desc.pop("kind", None)
    builders = {
        "interval": build_interval_grid,
        "rectangle": build_rectangle_grid,
        "metric_band": build_metric_band,
        "circle_arc": build_circle_arc,
    }
    if kind not in builders:
        raise ValueError(f"unknown chart kind {kind!r}")
    if kind == "interval":
        return build_interval_grid(desc["n"], desc.get("length", 1.0))
    return builders[kind](**desc)


@dataclass(frozen=True, eq=False)
class CircleCover:
    """Two overlapping arcs covering the unit circle.

    ``arcs[i]`` is the chart of arc ``U_i``; ``arc_nodes[i]`` lists the global
    circle indices of that chart's full grid (boundary nodes first and last).
    ``chi`` holds the partition of unity (shape ``(2, n)``) and ``sigma`` a
    bump with unit discrete integral supported in the overlap near angle 0.
    """

    n: int
    spacing: float
    theta: np.ndarray
    arcs: tuple[Chart, Chart]
    arc_nodes: tuple[np.ndarray, np.ndarray]
    overlap: np.ndarray
    chi: np.ndarray
    sigma: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, self.spacing)

    def interior_nodes(self, i: int) -> np.ndarray:
        return self.arc_nodes[i][1:-1]

    def boundary_nodes(self, i: int) -> np.ndarray:
        return self.arc_nodes[i][[0, -1]]

    def support_mask(self, i: int) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.interior_nodes(i)] = True
        return mask


def build_circle_cover(n: int, overlap_fraction: float) -> CircleCover:
    """Cover of the circle by a northern arc ``U_1`` and a southern arc ``U_2``.

    Each arc spans ``pi * (1 + 2 * overlap_fraction)`` (rounded to whole
    cells), so ``U_1 & U_2`` consists of two short arcs centred on angles 0
    and pi.  The partition of unity ramps as a raised cosine across each
    overlap.
    """
    n = _check_count("n", n)
    delta = float(overlap_fraction)
    if not 0.0 < delta < 0.5:
        raise ValueError("overlap_fraction must lie in (0, 0.5)")
    if n % 2:
        raise ValueError("circle cover needs an even node count")
    half = n // 2
    w = int(round(delta * n / 2))
    if 2 * w - 1 < 3:
        raise ValueError(
            f"overlap too thin: {max(2 * w - 1, 0)} shared nodes per overlap, need at least 3 "
            "to host the bump; increase n or overlap_fraction"
        )
    if 2 * w >= half:
        raise ValueError("overlap_fraction too large for this node count")

    h = 2.0 * math.pi / n
    j = np.arange(n)
    theta = j * h

    start1, start2 = -w, half - w
    n_int = half + 2 * w - 1
    arc1 = build_circle_arc(start1, n_int, n)
    arc2 = build_circle_arc(start2, n_int, n)
    nodes1 = np.mod(start1 + np.arange(n_int + 2), n)
    nodes2 = np.mod(start2 + np.arange(n_int + 2), n)

    # signed offset of each node from angle 0, in (-half, half]
    s = np.where(j > half, j - n, j)
    chi1 = np.zeros(n)
    chi1[(s >= w) & (s <= half - w)] = 1.0
    near0 = np.abs(s) <= w
    chi1[near0] = 0.5 * (1.0 - np.cos(math.pi * (s[near0] + w) / (2 * w)))
    nearpi = np.abs(j - half) <= w
    chi1[nearpi] = 0.5 * (1.0 - np.cos(math.pi * (half + w - j[nearpi]) / (2 * w)))
    chi2 = 1.0 - chi1

    sigma = np.zeros(n)
    inner0 = np.abs(s) < w
    sigma[inner0] = 1.0 + np.cos(math.pi * s[inner0] / w)
    sigma /= sigma.sum() * h

    in1 = np.zeros(n, dtype=bool)
    in1[nodes1[1:-1]] = True
    in2 = np.zeros(n, dtype=bool)
    in2[nodes2[1:-1]] = True

    return CircleCover(
        n=n,
        spacing=h,
        theta=_readonly(theta),
        arcs=(arc1, arc2),
        arc_nodes=(nodes1, nodes2),
        overlap=np.flatnonzero(in1 & in2),
        chi=_readonly(np.stack([chi1, chi2])),
        sigma=_readonly(sigma),
    )
