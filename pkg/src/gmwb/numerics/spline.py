"""Cubic splines on uniform grids.

The default scheme is local: second derivatives at the nodes are replaced by
three-point central differences, so a value inside ``[x_m, x_{m+1}]`` depends
only on the four nodes ``m-1 .. m+2``.  That makes every evaluation a fixed
linear stencil of node values, which the pricing engine exploits to assemble
its expectation operator once.  The classical global natural spline is kept
for cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

EXTRAPOLATION = ("linear", "raise")


@dataclass(frozen=True)
class UniformGrid:
    start: float
    step: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("grid needs at least one node")
        if self.count > 1 and not self.step > 0:
            raise ValueError(f"grid step must be positive, got {self.step}")

    @classmethod
    def from_bounds(cls, lo: float, hi: float, intervals: int) -> "UniformGrid":
        if intervals < 1 or not hi > lo:
            raise ValueError(f"invalid grid bounds [{lo}, {hi}] with {intervals} intervals")
        return cls(lo, (hi - lo) / intervals, intervals + 1)

    @property
    def stop(self) -> float:
        return self.start + self.step * (self.count - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)


def spline_weights(grid: UniformGrid, x, extrapolate: str = "linear"):
    """Stencil of the local spline at points ``x``.

    Returns ``(base, w)`` with ``base`` of shape ``x.shape`` and ``w`` of shape
    ``x.shape + (4,)`` such that the interpolant equals
    ``sum_l w[..., l] * f[base + l]``.

    Boundary intervals reuse the nearest interior second-derivative estimate.
    Outside the grid the value is continued linearly with the one-sided
    boundary slope of the end interval.
    """
    n = grid.count
    if n < 4:
        raise ValueError("local cubic spline needs at least 4 nodes")
    if extrapolate not in EXTRAPOLATION:
        raise ValueError(f"extrapolate must be one of {EXTRAPOLATION}")
    x = np.asarray(x, dtype=float)
    s = (x - grid.start) / grid.step
    # points within rounding of a node read the node value exactly
    s_round = np.round(s)
    s = np.where(np.abs(s - s_round) <= 1e-12 * np.maximum(1.0, np.abs(s)), s_round, s)
    below = s < 0
    above = s > n - 1
    if extrapolate == "raise" and (below.any() or above.any()):
        raise ValueError("evaluation point outside the grid")

    m = np.clip(np.floor(s), 0, n - 2).astype(np.int64)
    B = np.clip(s - m, 0.0, 1.0)
    A = 1.0 - B
    cA = (A**3 - A) / 6.0
    cB = (B**3 - B) / 6.0
    base = np.clip(m - 1, 0, n - 4)
    w = np.zeros(x.shape + (4,))
    idx = np.indices(x.shape) if x.ndim else ()

    def add(pos, val):
        np.add.at(w, (*idx, pos - base) if x.ndim else (pos - base,), val)

    add(m, A)
    add(m + 1, B)
    for c, node in ((cA, m), (cB, m + 1)):
        centre = np.clip(node, 1, n - 2)
        add(centre - 1, c)
        add(centre, -2.0 * c)
        add(centre + 1, c)

    if below.any() or above.any():
        e_lo = np.where(below, s, 0.0)
        e_hi = np.where(above, s - (n - 1), 0.0)
        lo = np.stack([1.0 - 1.5 * e_lo, 2.0 * e_lo, -0.5 * e_lo, np.zeros_like(e_lo)], axis=-1)
        hi = np.stack([np.zeros_like(e_hi), 0.5 * e_hi, -2.0 * e_hi, 1.0 + 1.5 * e_hi], axis=-1)
        w = np.where(below[..., None], lo, w)
        w = np.where(above[..., None], hi, w)
        base = np.where(below, 0, np.where(above, n - 4, base))
    return base, w


@dataclass(frozen=True)
class Spline1D:
    """Local cubic spline through ``values`` on ``grid``.

    ``second_derivatives`` holds the central-difference estimates used by the
    interpolant (end nodes copy their neighbour).
    """

    grid: UniformGrid
    values: np.ndarray
    second_derivatives: np.ndarray = field(repr=False)

    def __call__(self, x, extrapolate: str = "linear"):
        return spline1d_eval(self, x, extrapolate)


def spline1d_build(grid: UniformGrid, values) -> Spline1D:
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.count,):
        raise ValueError(f"expected {grid.count} values, got shape {values.shape}")
    if grid.count < 4:
        raise ValueError("local cubic spline needs at least 4 nodes")
    d2 = np.empty_like(values)
    d2[1:-1] = (values[:-2] - 2 * values[1:-1] + values[2:]) / grid.step**2
    d2[0], d2[-1] = d2[1], d2[-2]
    return Spline1D(grid, values, d2)


def spline1d_eval(s: Spline1D, x, extrapolate: str = "linear"):
    base, w = spline_weights(s.grid, x, extrapolate)
    taps = base[..., None] + np.arange(4)
    return np.sum(w * s.values[taps], axis=-1)[()]


@dataclass(frozen=True)
class Spline2D:
    """Tensor-product local spline; ``values[i, j]`` sits at ``(x_i, r_j)``."""

    x_grid: UniformGrid
    r_grid: UniformGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.x_grid.count, self.r_grid.count):
            raise ValueError("values shape does not match the grids")

    def __call__(self, x, r, extrapolate: str = "linear"):
        return spline2d_eval(self, x, r, extrapolate)


def spline2d_build(x_grid: UniformGrid, r_grid: UniformGrid, values) -> Spline2D:
    return Spline2D(x_grid, r_grid, np.asarray(values, dtype=float))


def spline2d_eval(s: Spline2D, x, r, extrapolate: str = "linear"):
    """Four 1-d splines in x on rows r_{k-1..k+2}, then one spline in r."""
    x, r = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(r, dtype=float))
    bx, wx = spline_weights(s.x_grid, x, extrapolate)
    br, wr = spline_weights(s.r_grid, r, extrapolate)
    ix = bx[..., None] + np.arange(4)
    ir = br[..., None] + np.arange(4)
    # rows[..., l] = spline in x evaluated on grid row ir[..., l]
    rows = np.einsum("...a,...ab->...b", wx, s.values[ix[..., :, None], ir[..., None, :]])
    return np.sum(wr * rows, axis=-1)[()]


class NaturalSpline1D:
    """Global natural cubic spline (tridiagonal system) on a uniform grid."""

    def __init__(self, grid: UniformGrid, values):
        self.grid = grid
        self._cs = CubicSpline(grid.nodes, np.asarray(values, dtype=float), bc_type="natural")

    def __call__(self, x):
        return self._cs(np.asarray(x, dtype=float))[()]

    def derivative(self, x, order: int = 1):
        return self._cs(np.asarray(x, dtype=float), order)[()]


def build_spline1d(grid: UniformGrid, values, method: str = "local"):
    """Spline factory: ``"local"`` (default) or ``"natural"`` (global tridiagonal)."""
    if method == "local":
        return spline1d_build(grid, values)
    if method == "natural":
        return NaturalSpline1D(grid, values)
    raise ValueError(f"unknown spline method {method!r}")
