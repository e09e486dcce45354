"""One-period conditional expectation as a sparse linear operator.

For a starting node ``(X, r)`` the value one period earlier is

    P(r) * sum_p w_p * Q(x_p, r_p)

where ``(x_p, r_p)`` are rotated Gauss-Hermite points of the bivariate
Normal transition law.  ``Q`` is read from node values by the local cubic
spline, so every output is a fixed linear combination of node values.  With
constant parameters and uniform dates the combination is the same for each
period and is assembled once into a CSR matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..grids import Grids
from ..model import ModelParams, TransitionMoments, bond_price
from ..numerics.quadrature import gauss_hermite, product_rule
from ..numerics.spline import spline_weights

_CHUNK_ENTRIES = 2_000_000


@dataclass(frozen=True)
class QuadraturePoints:
    """Standardised quadrature points and weights (weights sum to one)."""

    y1: np.ndarray
    y2: np.ndarray
    w: np.ndarray
    zero_y: np.ndarray
    zero_w: np.ndarray


def quadrature_points(q1: int, q2: int, rho_xr: float, transform: str, degenerate: bool) -> QuadraturePoints:
    """Points for the (x, r) law and for the rate marginal of the zero track."""
    g = gauss_hermite(q1)
    zero_y = np.sqrt(2.0) * g.nodes
    zero_w = g.weights / np.sqrt(np.pi)
    if degenerate:
        return QuadraturePoints(zero_y, np.zeros_like(zero_y), zero_w, np.zeros(1), np.ones(1))
    y1, y2, w = product_rule(q1, q2, rho_xr, transform)
    return QuadraturePoints(y1, y2, w, zero_y, zero_w)


@dataclass
class ExpectationOperator:
    """Sparse map from node values at the period end to values at its start.

    Outputs are the points ``(x_out, r_out)``; ``x_out = -inf`` marks a
    zero-wealth point.  Inputs are the flattened table ``(M + 2) * (K + 1)``
    with the zero-wealth track in the first ``K + 1`` entries.
    """

    matrix: sp.csr_matrix
    discount: np.ndarray
    x_center: np.ndarray
    dx: np.ndarray
    weights: np.ndarray
    zero_out: np.ndarray
    W0: float

    @property
    def n_out(self) -> int:
        return self.matrix.shape[0]

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Apply to node values of shape ``(n_in,)`` or ``(n_in, S)``."""
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(np.atleast_2d(values.T).T))[0]
            raise FloatingPointError(f"non-finite value at input node {bad[0]} (surface {bad[-1]})")
        out = self.matrix @ values
        if not np.all(np.isfinite(out)):
            bad = np.argwhere(~np.isfinite(np.atleast_2d(out.T).T))[0]
            raise FloatingPointError(f"non-finite expectation at output node {bad[0]}")
        return out

    def apply_payoff(self, payoff) -> np.ndarray:
        """Expectation of a wealth payoff evaluated exactly at the quadrature points.

        ``payoff`` maps an array of wealth values to payoffs of the same shape.
        """
        out = np.empty(self.n_out)
        live = ~self.zero_out
        W = self.W0 * np.exp(self.x_center[live, None] + self.dx[None, :])
        out[live] = payoff(W) @ self.weights
        out[~live] = np.asarray(payoff(np.zeros(1)), dtype=float)[0]
        return out * self.discount


def _x_stencil(grids: Grids, x: np.ndarray):
    """Wealth-direction stencil on the extended rows (row 0 is zero wealth).

    Below the lowest X node the value is linear in W between zero wealth and
    that node; above the top node the spline continues linearly in X.
    """
    below = x < grids.x.start
    base, w = spline_weights(grids.x, np.where(below, grids.x.start, x))
    base = base + 1
    if below.any():
        f = np.exp(x[below] - grids.x.start)
        base[below] = 0
        wb = np.zeros((f.size, 4))
        wb[:, 0] = 1.0 - f
        wb[:, 1] = f
        w[below] = wb
    return base, w


def _r_stencil(grids: Grids, r: np.ndarray):
    if grids.degenerate_rate:
        return np.zeros(r.shape, dtype=np.int64), np.ones(r.shape + (1,))
    return spline_weights(grids.r, r)


def build_operator(
    params: ModelParams,
    grids: Grids,
    moments: TransitionMoments,
    q1: int,
    q2: int,
    x_out,
    r_out,
    transform: str = "rotation",
) -> ExpectationOperator:
    """Assemble the expectation operator for the output points ``(x_out, r_out)``.

    ``x_out`` is log-wealth relative to ``grids.W0``; ``-inf`` requests the
    zero-wealth value, computed from the rate marginal alone.
    """
    x_out = np.asarray(x_out, dtype=float).ravel()
    r_out = np.broadcast_to(np.asarray(r_out, dtype=float), x_out.shape).ravel()
    qp = quadrature_points(q1, q2, moments.rho_xr, transform, grids.degenerate_rate)
    K1 = grids.r.count
    n_in = grids.rows * K1
    n_out = x_out.size
    discount = np.asarray(bond_price(params, r_out, 0.0, moments.delta), dtype=float).reshape(n_out)
    zero_out = np.isneginf(x_out)
    x_center = np.where(zero_out, 0.0, moments.mean_x(np.where(zero_out, 0.0, x_out), r_out))
    mean_r = moments.mean_r(r_out)
    dx = moments.tau_x * qp.y1
    dr = moments.tau_r * qp.y2
    dr_zero = moments.tau_r * qp.zero_y

    blocks, order = [], []
    live_idx = np.flatnonzero(~zero_out)
    P = qp.w.size
    taps_r = 1 if grids.degenerate_rate else 4
    chunk = max(1, _CHUNK_ENTRIES // (P * 4 * taps_r))
    for lo in range(0, live_idx.size, chunk):
        idx = live_idx[lo : lo + chunk]
        xs = x_center[idx, None] + dx[None, :]
        rs = mean_r[idx, None] + dr[None, :]
        bx, wx = _x_stencil(grids, xs)
        br, wr = _r_stencil(grids, rs)
        scale = (discount[idx, None] * qp.w[None, :])[..., None, None]
        vals = scale * wx[..., :, None] * wr[..., None, :]
        cols = (bx[..., None, None] + np.arange(4)[:, None]) * K1 + (br[..., None, None] + np.arange(taps_r)[None, :])
        rows = np.broadcast_to(np.arange(idx.size)[:, None, None, None], cols.shape)
        blocks.append(sp.coo_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(idx.size, n_in)).tocsr())
        order.append(idx)
    zero_idx = np.flatnonzero(zero_out)
    if zero_idx.size:
        rs = mean_r[zero_idx, None] + dr_zero[None, :]
        br, wr = _r_stencil(grids, rs)
        vals = (discount[zero_idx, None] * qp.zero_w[None, :])[..., None] * wr
        cols = br[..., None] + np.arange(taps_r)
        rows = np.broadcast_to(np.arange(zero_idx.size)[:, None, None], cols.shape)
        blocks.append(sp.coo_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(zero_idx.size, n_in)).tocsr())
        order.append(zero_idx)
    stacked = sp.vstack(blocks, format="csr")
    matrix = stacked[np.argsort(np.concatenate(order), kind="stable")]
    matrix.sum_duplicates()
    matrix.sort_indices()
    return ExpectationOperator(
        matrix=matrix,
        discount=discount,
        x_center=x_center,
        dx=dx,
        weights=qp.w,
        zero_out=zero_out,
        W0=grids.W0,
    )


def node_points(grids: Grids, r_nodes: np.ndarray | None = None):
    """Output points for every table entry, zero-wealth track first."""
    r_nodes = grids.r.nodes if r_nodes is None else np.asarray(r_nodes, dtype=float)
    x = np.concatenate([[-np.inf], grids.x.nodes])
    X, R = np.meshgrid(x, r_nodes, indexing="ij")
    return X.ravel(), R.ravel()
