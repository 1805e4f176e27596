"""Log-polar annular grids and the scalar/vector fields living on them.

The mesh covers an annulus ``r_inner <= r <= r_outer`` with log-uniform
radii (equal spacing in ``s = ln r``) and uniformly spaced periodic
angles.  Standard grids built by :func:`build_grid` have ``r_inner = 1``
(the unit-disc obstacle boundary); rescaled copies with a different inner
radius are produced by :meth:`PolarGrid.scaled`.

Fields store one value (or one Cartesian component pair) per node in
radial-major layout: ``values[i, j]`` sits at ``(radii[i], theta[j])``.
Grids and fields are immutable after construction and safe to share.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = [
    "PolarGrid",
    "ScalarField",
    "VectorField",
    "build_grid",
    "interpolate_field",
    "read_field",
    "write_field",
]

Fill = Union[None, float, Callable[[np.ndarray, np.ndarray], np.ndarray]]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PolarGrid:
    """Log-uniform polar mesh of an annulus.

    Node ``(i, j)`` lies at radius ``radii[i]`` and angle
    ``theta[j] = 2*pi*j / n_theta``; the angular direction is periodic.
    ``log_radii`` holds exact multiples of the log spacing so that equal
    grids compare bitwise and interpolation between them is exact.
    """

    n_r: int
    n_theta: int
    radii: np.ndarray
    log_radii: np.ndarray
    theta: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.n_r < 8:
            raise ValueError(f"n_r must be >= 8, got {self.n_r}")
        if self.n_theta < 8 or self.n_theta % 2 != 0:
            raise ValueError(f"n_theta must be even and >= 8, got {self.n_theta}")
        object.__setattr__(self, "radii", _readonly(self.radii))
        object.__setattr__(self, "log_radii", _readonly(self.log_radii))
        object.__setattr__(self, "theta", _readonly(self.theta))

    @property
    def r_inner(self) -> float:
        return float(self.radii[0])

    @property
    def r_outer(self) -> float:
        return float(self.radii[-1])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_r, self.n_theta)

    @property
    def ds(self) -> float:
        """Spacing of ``ln r`` between consecutive radii."""
        return float(self.log_radii[1] - self.log_radii[0])

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.n_theta

    def nodes_xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Cartesian node coordinates, shape ``(n_r, n_theta)`` each."""
        r = self.radii[:, None]
        return r * np.cos(self.theta)[None, :], r * np.sin(self.theta)[None, :]

    def scaled(self, factor: float) -> "PolarGrid":
        """Geometrically similar grid with all radii multiplied by ``factor``."""
        if factor <= 0.0:
            raise ValueError("scale factor must be positive")
        return PolarGrid(
            n_r=self.n_r,
            n_theta=self.n_theta,
            radii=self.radii * factor,
            log_radii=self.log_radii + np.log(factor),
            theta=self.theta,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolarGrid):
            return NotImplemented
        return (
            self.n_r == other.n_r
            and self.n_theta == other.n_theta
            and np.array_equal(self.radii, other.radii)
        )

    def __hash__(self) -> int:
        return hash((self.n_r, self.n_theta, self.radii.tobytes()))


def build_grid(n_r: int, n_theta: int, r_outer: float) -> PolarGrid:
    """Build the standard annulus grid ``1 <= r <= r_outer``.

    Radii are ``exp(i * ln(r_outer) / (n_r - 1))``: the first is exactly 1,
    the last exactly ``r_outer``, and the ratio of consecutive radii is
    constant.  ``n_theta`` must be even so every node has a mirror partner
    across the x-axis.
    """
    if n_r < 8:
        raise ValueError(f"n_r must be >= 8, got {n_r}")
    if n_theta < 8 or n_theta % 2 != 0:
        raise ValueError(f"n_theta must be even and >= 8, got {n_theta}")
    if not r_outer > 1.0:
        raise ValueError(f"r_outer must exceed 1, got {r_outer}")
    log_radii = np.arange(n_r) * (np.log(r_outer) / (n_r - 1))
    radii = np.exp(log_radii)
    radii[0] = 1.0
    radii[-1] = r_outer
    theta = np.arange(n_theta) * (2.0 * np.pi / n_theta)
    return PolarGrid(n_r=n_r, n_theta=n_theta, radii=radii, log_radii=log_radii, theta=theta)


def _check_values(grid: PolarGrid, values: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(values, dtype=float)
    if a.shape != grid.shape:
        raise ValueError(f"{name} has shape {a.shape}, expected {grid.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return _readonly(a)


@dataclass(frozen=True)
class ScalarField:
    """One real value per grid node, radial-major."""

    grid: PolarGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _check_values(self.grid, self.values, "values"))

    @staticmethod
    def zeros(grid: PolarGrid) -> "ScalarField":
        return ScalarField(grid, np.zeros(grid.shape))

    @staticmethod
    def from_function(grid: PolarGrid, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "ScalarField":
        x, y = grid.nodes_xy()
        return ScalarField(grid, np.broadcast_to(fn(x, y), grid.shape))


@dataclass(frozen=True)
class VectorField:
    """Cartesian component pair per grid node.

    Components are stored Cartesian even though node positions are polar,
    so far-field comparisons and force integrals need no frame change.
    """

    grid: PolarGrid
    w1: np.ndarray
    w2: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "w1", _check_values(self.grid, self.w1, "w1"))
        object.__setattr__(self, "w2", _check_values(self.grid, self.w2, "w2"))

    @staticmethod
    def zeros(grid: PolarGrid) -> "VectorField":
        return VectorField(grid, np.zeros(grid.shape), np.zeros(grid.shape))

    @staticmethod
    def constant(grid: PolarGrid, c1: float, c2: float) -> "VectorField":
        return VectorField(grid, np.full(grid.shape, float(c1)), np.full(grid.shape, float(c2)))

    @staticmethod
    def from_functions(
        grid: PolarGrid,
        f1: Callable[[np.ndarray, np.ndarray], np.ndarray],
        f2: Callable[[np.ndarray, np.ndarray], np.ndarray],
    ) -> "VectorField":
        x, y = grid.nodes_xy()
        return VectorField(
            grid,
            np.broadcast_to(f1(x, y), grid.shape),
            np.broadcast_to(f2(x, y), grid.shape),
        )

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.w1, self.w2)


def _fill_values(fill: Fill, x: np.ndarray, y: np.ndarray, what: str) -> np.ndarray:
    if fill is None:
        raise ValueError(
            f"{what}: target nodes lie outside the source annulus and no far-field fill was given"
        )
    if callable(fill):
        return np.broadcast_to(np.asarray(fill(x, y), dtype=float), x.shape)
    return np.full(x.shape, float(fill))


def _radial_weights(src: PolarGrid, dst: PolarGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Source cell index, fraction, and outside-mask for each dst radius."""
    s_src = src.log_radii
    s_dst = dst.log_radii
    eps = 1e-12 * max(1.0, abs(float(s_src[-1])))
    if np.any(s_dst < s_src[0] - eps):
        raise ValueError("target grid extends inside the source inner radius")
    outside = s_dst > s_src[-1] + eps
    idx = np.searchsorted(s_src, s_dst, side="right") - 1
    idx = np.clip(idx, 0, src.n_r - 2)
    t = (s_dst - s_src[idx]) / (s_src[idx + 1] - s_src[idx])
    t = np.clip(t, 0.0, 1.0)
    return idx, t, outside


def _angular_weights(src: PolarGrid, dst: PolarGrid) -> tuple[np.ndarray, np.ndarray]:
    pos = dst.theta / src.dtheta
    jdx = np.floor(pos).astype(int)
    u = pos - jdx
    # on-node targets must reproduce node values exactly
    on_node = np.isclose(u, 1.0, atol=1e-12)
    jdx = np.where(on_node, jdx + 1, jdx)
    u = np.where(on_node, 0.0, u)
    u = np.where(np.isclose(u, 0.0, atol=1e-12), 0.0, u)
    return jdx % src.n_theta, u


def _interp_values(values: np.ndarray, src: PolarGrid, dst: PolarGrid, fill: Fill, what: str) -> np.ndarray:
    idx, t, outside = _radial_weights(src, dst)
    jdx, u = _angular_weights(src, dst)
    jp = (jdx + 1) % src.n_theta
    ii = idx[:, None]
    out = (
        (1.0 - t)[:, None] * ((1.0 - u)[None, :] * values[ii, jdx[None, :]] + u[None, :] * values[ii, jp[None, :]])
        + t[:, None] * ((1.0 - u)[None, :] * values[ii + 1, jdx[None, :]] + u[None, :] * values[ii + 1, jp[None, :]])
    )
    if np.any(outside):
        x, y = dst.nodes_xy()
        rows = np.where(outside)[0]
        out[rows] = _fill_values(fill, x[rows], y[rows], what)
    return out


def interpolate_field(f, dst: PolarGrid, *, fill=None):
    """Bilinear interpolation in ``(ln r, theta)`` onto another grid.

    Reproduces node values exactly when ``dst`` equals the source grid.
    Destination nodes beyond the source outer radius take the far-field
    ``fill``: a constant, or a callable of Cartesian coordinates.  For a
    :class:`VectorField`, ``fill`` is a pair, one entry per component.
    """
    if isinstance(f, ScalarField):
        return ScalarField(dst, _interp_values(f.values, f.grid, dst, fill, "scalar field"))
    if isinstance(f, VectorField):
        if fill is None:
            fill = (None, None)
        return VectorField(
            dst,
            _interp_values(f.w1, f.grid, dst, fill[0], "vector component 1"),
            _interp_values(f.w2, f.grid, dst, fill[1], "vector component 2"),
        )
    raise TypeError(f"expected ScalarField or VectorField, got {type(f).__name__}")


# --- "polar-field v1" text format -------------------------------------------
#
# line 1: polar-field v1
# line 2: n_r n_theta r_outer kind        (kind in {scalar, vector})
# then one node per line, radial-major: one value, or two components.
# The annulus is described by the outer/inner radius ratio, so a field on a
# rescaled grid round-trips onto the similar standard grid.

_MAGIC = "polar-field v1"


def write_field(f, path) -> None:
    """Write a field in the ``polar-field v1`` text format."""
    grid = f.grid
    ratio = grid.r_outer / grid.r_inner
    buf = io.StringIO()
    buf.write(_MAGIC + "\n")
    kind = "scalar" if isinstance(f, ScalarField) else "vector"
    buf.write(f"{grid.n_r} {grid.n_theta} {ratio:.17e} {kind}\n")
    if kind == "scalar":
        for v in f.values.ravel():
            buf.write(f"{v:.17e}\n")
    else:
        for a, b in zip(f.w1.ravel(), f.w2.ravel()):
            buf.write(f"{a:.17e} {b:.17e}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_field(path):
    """Read a ``polar-field v1`` file onto the standard annulus grid."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != _MAGIC:
            raise ValueError(f"{path}: not a polar-field v1 file (header {header!r})")
        parts = fh.readline().split()
        if len(parts) != 4:
            raise ValueError(f"{path}: malformed size line")
        n_r, n_theta, r_outer, kind = int(parts[0]), int(parts[1]), float(parts[2]), parts[3]
        grid = build_grid(n_r, n_theta, r_outer)
        data = np.loadtxt(fh, dtype=float, ndmin=2)
    if data.shape[0] != n_r * n_theta:
        raise ValueError(f"{path}: expected {n_r * n_theta} node lines, got {data.shape[0]}")
    if kind == "scalar":
        if data.shape[1] != 1:
            raise ValueError(f"{path}: scalar file with {data.shape[1]} columns")
        return ScalarField(grid, data[:, 0].reshape(grid.shape))
    if kind == "vector":
        if data.shape[1] != 2:
            raise ValueError(f"{path}: vector file with {data.shape[1]} columns")
        return VectorField(grid, data[:, 0].reshape(grid.shape), data[:, 1].reshape(grid.shape))
    raise ValueError(f"{path}: unknown field kind {kind!r}")
