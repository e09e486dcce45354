"""Computational grids in log-wealth, short rate and guarantee balance."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import ModelParams, joint_moments
from .numerics.spline import UniformGrid


@dataclass(frozen=True)
class GridSpec:
    """Mesh and quadrature settings.

    ``M`` and ``K`` count intervals, so the X grid has ``M + 1`` nodes and the
    rate grid ``K + 1``.  Bounds left as ``None`` are derived from the
    terminal distribution, ``n_sd`` standard deviations either side of the
    mean.
    """

    M: int = 100
    K: int = 60
    q1: int = 9
    q2: int = 5
    N_dt: int = 1
    n_sd: float = 6.0
    X_min: float | None = None
    X_max: float | None = None
    r_min: float | None = None
    r_max: float | None = None
    transform: str = "rotation"

    def __post_init__(self):
        if self.M < 3:
            raise ValueError(f"M must be at least 3 (four X nodes), got {self.M}")
        if self.K < 0:
            raise ValueError(f"K must be non-negative, got {self.K}")
        if not (1 <= self.q2 and 1 <= self.q1):
            raise ValueError("quadrature orders must be positive")
        if self.N_dt < 1:
            raise ValueError(f"N_dt must be a positive integer, got {self.N_dt}")
        if not self.n_sd > 0:
            raise ValueError(f"n_sd must be positive, got {self.n_sd}")
        if self.transform not in ("rotation", "cholesky"):
            raise ValueError(f"unknown transform {self.transform!r}")

    def with_(self, **changes) -> "GridSpec":
        return replace(self, **changes)


COARSE = GridSpec(M=50, K=30, q1=5, q2=3)
FINE = GridSpec(M=100, K=60, q1=9, q2=5)
VANILLA = GridSpec(M=100, K=20, q1=12, q2=3, N_dt=5)
MESHES = {"coarse": COARSE, "fine": FINE, "vanilla": VANILLA}


@dataclass(frozen=True)
class Grids:
    """Concrete node sets.

    X is log-wealth relative to the premium, ``X = ln(W / W0)``.  When the
    rate dimension is degenerate the rate grid holds a single node.
    """

    x: UniformGrid
    r: UniformGrid
    W0: float
    degenerate_rate: bool

    @property
    def M(self) -> int:
        return self.x.count - 1

    @property
    def K(self) -> int:
        return self.r.count - 1

    @property
    def wealth(self) -> np.ndarray:
        return self.W0 * np.exp(self.x.nodes)

    @property
    def rows(self) -> int:
        """Rows of a value table: the zero-wealth track plus the X nodes."""
        return self.x.count + 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.r.count


def guarantee_levels(premium: float, J: int) -> np.ndarray:
    """Uniform guarantee-balance grid from 0 to ``premium`` inclusive."""
    if J < 2:
        raise ValueError(f"J must be at least 2, got {J}")
    levels = premium * np.arange(J) / (J - 1)
    levels[-1] = premium
    return levels


def build_grids(params: ModelParams, T: float, alpha: float, spec: GridSpec, W0: float = 1.0) -> Grids:
    """Uniform X and r grids covering ``n_sd`` standard deviations at maturity.

    Bounds follow the law of ``ln W(T)`` (fee included, no withdrawals) and of
    ``r(T)`` under the measure with the bond maturing at ``T`` as numeraire.
    Explicit bounds in ``spec`` take precedence.
    """
    if not T > 0:
        raise ValueError(f"maturity must be positive, got {T}")
    jm = joint_moments(params, T, measure="Q~")
    mean_x = jm.mean_lnS - math.log(params.S0) - alpha * T
    sd_x = math.sqrt(jm.var_lnS)
    if not sd_x > 0:
        raise ValueError("wealth variance is zero; X grid bounds collapse")
    x_lo = mean_x - spec.n_sd * sd_x if spec.X_min is None else spec.X_min
    x_hi = mean_x + spec.n_sd * sd_x if spec.X_max is None else spec.X_max
    if not x_lo < 0 < x_hi:
        raise ValueError(f"X grid [{x_lo}, {x_hi}] must contain the starting point 0")
    x_grid = UniformGrid.from_bounds(x_lo, x_hi, spec.M)

    degenerate = params.deterministic_rate
    if degenerate:
        r_grid = UniformGrid(params.r0, 1.0, 1)
    else:
        if spec.K < 3:
            raise ValueError(f"stochastic rates need K >= 3 (four r nodes), got {spec.K}")
        sd_r = math.sqrt(jm.var_r)
        r_lo = jm.mean_r - spec.n_sd * sd_r if spec.r_min is None else spec.r_min
        r_hi = jm.mean_r + spec.n_sd * sd_r if spec.r_max is None else spec.r_max
        if not r_lo < params.r0 < r_hi:
            raise ValueError(f"rate grid [{r_lo}, {r_hi}] must contain r0 = {params.r0}")
        r_grid = UniformGrid.from_bounds(r_lo, r_hi, spec.K)
    return Grids(x=x_grid, r=r_grid, W0=W0, degenerate_rate=degenerate)


@dataclass(frozen=True)
class ValueSurface:
    """Contract values for one guarantee level on the (X, r) grid.

    ``values[m, k]`` is the value at ``W = W0 * exp(X_m)``, ``r = r_k`` and
    ``zero_wealth_values[k]`` the value at ``W = 0``.
    """

    values: np.ndarray
    zero_wealth_values: np.ndarray
    guarantee_level: float
    label: str = ""

    @classmethod
    def from_table(cls, table: np.ndarray, guarantee_level: float, label: str = "") -> "ValueSurface":
        """Split a ``(M + 2, K + 1)`` table whose first row is the zero-wealth track."""
        return cls(table[1:].copy(), table[0].copy(), guarantee_level, label)

    def to_table(self) -> np.ndarray:
        return np.vstack([self.zero_wealth_values[None, :], self.values])
