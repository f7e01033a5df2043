"""Uniform periodic grids on the 4-torus and finite-difference calculus.

A chart is a uniform lattice on [0, L_0) x ... x [0, L_3) with periodic
wraparound, node coordinates x_i = j * h_i and spacing h_i = L_i / n_i.
All derivative operators are 7-point 6th-order central differences applied
with `np.roll`, so they are exact on constants, antisymmetric as matrices
(summation by parts holds to machine precision under plain sums), and
commute across axes.  Quadrature is the metric-weighted Riemann sum
sum_p f(p) vol(p) prod_i h_i, which is spectrally accurate for smooth
periodic integrands.

Fields are immutable value objects: a `GridSpec` plus a read-only ndarray
whose leading four axes are the grid axes (axis-major, C order).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "GridSpec",
    "ScalarField",
    "TensorField",
    "partial_derivative",
    "integrate",
    "lp_norm",
    "d1",
    "d2",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GridSpec:
    """Shape of a periodic 4-torus chart: node counts and box periods."""

    dims: tuple[int, int, int, int]
    periods: tuple[float, float, float, float] = (2 * np.pi,) * 4

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        periods = tuple(float(L) for L in self.periods)
        if len(dims) != 4 or len(periods) != 4:
            raise ValueError("GridSpec needs exactly 4 dims and 4 periods")
        if any(n < 4 for n in dims):
            raise ValueError(f"dims must be >= 4 per axis, got {dims}")
        if any(L <= 0 for L in periods):
            raise ValueError(f"periods must be positive, got {periods}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "periods", periods)

    @property
    def spacing(self) -> tuple[float, float, float, float]:
        return tuple(L / n for L, n in zip(self.periods, self.dims))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def node_count(self) -> int:
        return int(np.prod(self.dims))

    def coordinate(self, axis: int) -> np.ndarray:
        """1D node coordinates along one axis."""
        h = self.spacing[axis]
        return np.arange(self.dims[axis]) * h

    def mesh(self, axis: int) -> np.ndarray:
        """Coordinate of `axis` broadcast to the full grid shape."""
        shape = [1, 1, 1, 1]
        shape[axis] = self.dims[axis]
        return np.broadcast_to(
            self.coordinate(axis).reshape(shape), self.dims
        ).copy()

    def compatible(self, other: "GridSpec") -> bool:
        return self.dims == other.dims and np.allclose(self.periods, other.periods)


@dataclass(frozen=True)
class ScalarField:
    """Immutable real scalar samples on a grid chart."""

    grid: GridSpec
    values: np.ndarray
    units: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.dims:
            raise ValueError(f"scalar field shape {v.shape} != grid dims {self.grid.dims}")
        object.__setattr__(self, "values", _freeze(v))


@dataclass(frozen=True)
class TensorField:
    """Immutable tensor samples: shape dims + (4,)*rank, coordinate components.

    `sym` is a declared storage symmetry for rank-2 fields: "", "symmetric"
    or "antisymmetric"; declared symmetries are validated on construction.
    """

    grid: GridSpec
    values: np.ndarray
    rank: int
    sym: str = ""
    units: str = ""

    def __post_init__(self):
        if self.rank not in (0, 1, 2, 3):
            raise ValueError("rank must be in 0..3")
        v = np.asarray(self.values, dtype=float)
        want = self.grid.dims + (4,) * self.rank
        if v.shape != want:
            raise ValueError(f"tensor field shape {v.shape} != {want}")
        if self.sym and self.rank == 2:
            t = np.swapaxes(v, -1, -2)
            ok = np.allclose(v, t, atol=1e-12) if self.sym == "symmetric" else \
                np.allclose(v, -t, atol=1e-12)
            if not ok:
                raise ValueError(f"declared {self.sym} storage violated")
        object.__setattr__(self, "values", _freeze(v))


# 7-point 6th-order central first derivative; antisymmetric circulant, so its
# plain-sum adjoint is exactly -D and derivative-of-constant is exactly 0.
def d1(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    r = np.roll
    return (
        r(values, -3, axis)
        - 9 * r(values, -2, axis)
        + 45 * r(values, -1, axis)
        - 45 * r(values, 1, axis)
        + 9 * r(values, 2, axis)
        - r(values, 3, axis)
    ) / (60.0 * h)


# dedicated 6th-order second derivative (same axis twice); used by the
# curvature stack where composing two first-derivative stencils would waste
# accuracy.
def d2(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    r = np.roll
    return (
        2 * r(values, -3, axis)
        - 27 * r(values, -2, axis)
        + 270 * r(values, -1, axis)
        - 490 * values
        + 270 * r(values, 1, axis)
        - 27 * r(values, 2, axis)
        + 2 * r(values, 3, axis)
    ) / (180.0 * h * h)


FieldLike = Union[ScalarField, TensorField]


def partial_derivative(f: FieldLike, axis: int) -> FieldLike:
    """Periodic central difference of a field along one grid axis."""
    if not 0 <= axis <= 3:
        raise ValueError("axis must be 0..3")
    h = f.grid.spacing[axis]
    out = d1(f.values, axis, h)
    if isinstance(f, ScalarField):
        return ScalarField(f.grid, out, units=f.units)
    return TensorField(f.grid, out, rank=f.rank, sym=f.sym, units=f.units)


def _volume_weight(grid: GridSpec, metric=None) -> np.ndarray | float:
    if metric is None:
        return 1.0
    if not grid.compatible(metric.grid):
        raise ValueError("metric lives on a different grid")
    return metric.vol


def integrate(f: ScalarField | np.ndarray, metric=None, grid: GridSpec | None = None) -> float:
    """Riemann-sum integral with metric volume weight: sum f * vol * prod(h)."""
    if isinstance(f, ScalarField):
        grid, values = f.grid, f.values
    else:
        if grid is None:
            raise ValueError("pass grid= when integrating a bare array")
        values = np.asarray(f)
    w = _volume_weight(grid, metric)
    # flattened C-order sum: fixed reduction order for reproducibility
    return float(np.sum(values * w)) * grid.cell_volume


def lp_norm(f: ScalarField | np.ndarray, p, metric=None, grid: GridSpec | None = None) -> float:
    """L^p norm (p in {2, 4, inf}) of a pointwise-magnitude field.

    Callers with multi-component fields pass the pointwise fiber norm as a
    scalar field; the volume weight enters the p < inf quadrature only.
    """
    if isinstance(f, ScalarField):
        grid, values = f.grid, f.values
    else:
        if grid is None:
            raise ValueError("pass grid= when norming a bare array")
        values = np.asarray(f)
    if p in (np.inf, "inf"):
        return float(np.max(np.abs(values)))
    if p == 2:
        return float(np.sqrt(integrate(values**2, metric=metric, grid=grid)))
    if p == 4:
        return float(integrate(values**4, metric=metric, grid=grid) ** 0.25)
    raise ValueError("p must be 2, 4 or inf")
