"""GMWB contract terms, cashflows and the withdrawal jump conditions.

Withdrawal jumps act on value tables of shape ``(M + 2, K + 1)``: row 0 is
the zero-wealth track and rows ``1..M+1`` are the X nodes (see
:class:`gmwb.grids.Grids`).  Reading a table at a reduced wealth uses the
local cubic spline in X; wealth between zero and the lowest node is linearly
interpolated in W against the zero-wealth track.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import dynamic_jump_kernel, empty_actions, shift_kernel
from .grids import Grids, ValueSurface, guarantee_levels
from .numerics.spline import spline_weights


@dataclass(frozen=True)
class GMWBContract:
    """Variable annuity with a guaranteed withdrawal benefit.

    Parameters
    ----------
    premium : float
        Initial wealth ``W(0)``, also the initial guarantee balance.
    T : float
        Maturity in years.
    Nw : int
        Withdrawals per year; dates are equally spaced.
    alpha : float
        Annual proportional fee, continuously deducted from wealth.
    beta : float
        Penalty on the part of a withdrawal above the contractual amount.
    """

    premium: float = 1.0
    T: float = 10.0
    Nw: int = 4
    alpha: float = 0.0
    beta: float = 0.1

    def __post_init__(self):
        if not self.premium > 0:
            raise ValueError(f"premium must be positive, got {self.premium}")
        if not self.T > 0:
            raise ValueError(f"maturity must be positive, got {self.T}")
        if int(self.Nw) != self.Nw or self.Nw < 1:
            raise ValueError(f"Nw must be a positive integer, got {self.Nw}")
        n = self.T * self.Nw
        if abs(n - round(n)) > 1e-9:
            raise ValueError(f"T * Nw must be an integer, got {n}")
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")

    @property
    def N(self) -> int:
        return int(round(self.T * self.Nw))

    @property
    def g(self) -> float:
        return 1.0 / self.T

    @property
    def delta(self) -> float:
        return self.T / self.N

    @property
    def G(self) -> float:
        """Contractual amount per period, ``premium * delta / T``."""
        return self.premium / self.N

    @property
    def dates(self) -> np.ndarray:
        return self.delta * np.arange(self.N + 1)

    def with_fee(self, alpha: float) -> "GMWBContract":
        return GMWBContract(self.premium, self.T, self.Nw, alpha, self.beta)


def cashflow(contract: GMWBContract, n: int, gamma):
    """Cash received for withdrawing ``gamma`` at date ``n``.

    Amounts up to the contractual ``G`` are paid in full; the excess is cut
    by the penalty ``beta``.
    """
    if not 1 <= n <= contract.N:
        raise ValueError(f"date index must be in [1, {contract.N}], got {n}")
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0):
        raise ValueError("withdrawal amount must be non-negative")
    G = contract.G
    return np.where(gamma <= G, gamma, G + (1.0 - contract.beta) * (gamma - G))[()]


def terminal_payoff(contract: GMWBContract, W, A):
    """Payoff at maturity: the larger of the wealth and the last withdrawal of ``A``."""
    W = np.asarray(W, dtype=float)
    A = np.asarray(A, dtype=float)
    if np.any(W < 0):
        raise ValueError("wealth must be non-negative")
    if np.any(A < 0) or np.any(A > contract.premium * (1 + 1e-12)):
        raise ValueError("guarantee balance must lie in [0, premium]")
    return np.maximum(W, cashflow(contract, contract.N, A))[()]


def shift_stencil(grids: Grids, d: float):
    """Stencil reading a value table at wealth ``max(W_row - d, 0)``.

    Returns ``(base, w)`` with ``base`` of shape ``(M + 2,)`` and ``w`` of
    shape ``(M + 2, 4)``; the value is ``sum_l w[row, l] * table[base + l]``.
    """
    R = grids.rows
    base = np.zeros(R, dtype=np.int64)
    w = np.zeros((R, 4))
    w[0, 0] = 1.0
    if d == 0:
        base[1:] = np.clip(np.arange(R - 1) - 1, 0, R - 5) + 1
        w[1:] = 0.0
        w[np.arange(1, R), np.arange(1, R) - base[1:]] = 1.0
        return base, w
    if d < 0:
        raise ValueError("withdrawal must be non-negative")
    W = grids.wealth - d
    W_lo = grids.wealth[0]
    rows = np.arange(1, R)
    empty = W <= 0
    low = (W > 0) & (W < W_lo)
    inside = W >= W_lo
    w[rows[empty], 0] = 1.0
    f = W[low] / W_lo
    w[rows[low], 0] = 1.0 - f
    w[rows[low], 1] = f
    if inside.any():
        X = np.log(W[inside] / grids.W0)
        b, wx = spline_weights(grids.x, X)
        base[rows[inside]] = b + 1
        w[rows[inside]] = wx
    return base, w


@dataclass(frozen=True)
class JumpStencils:
    """Stencils for every withdrawal ``l * dA`` on a uniform guarantee grid."""

    levels: np.ndarray
    base: np.ndarray  # (M + 2, J)
    weights: np.ndarray  # (M + 2, J, 4)
    cash: np.ndarray  # (J,)


def jump_stencils(grids: Grids, contract: GMWBContract, J: int) -> JumpStencils:
    levels = guarantee_levels(contract.premium, J)
    R = grids.rows
    base = np.zeros((R, J), dtype=np.int64)
    weights = np.zeros((R, J, 4))
    for l in range(J):
        base[:, l], weights[:, l] = shift_stencil(grids, levels[l])
    cash = cashflow(contract, 1, levels)
    return JumpStencils(levels, base, weights, np.asarray(cash, dtype=float))


def jump_static_tables(tables: np.ndarray, grids: Grids, contract: GMWBContract, gamma: float | None = None):
    """Static withdrawal on a stack of tables ``(S, M + 2, K + 1)``."""
    gamma = contract.G if gamma is None else gamma
    tables = np.ascontiguousarray(tables, dtype=float)
    base, w = shift_stencil(grids, gamma)
    out = np.empty_like(tables)
    shift_kernel(tables, base, w, float(cashflow(contract, 1, gamma)), out)
    return out


def jump_dynamic_tables(
    tables: np.ndarray,
    stencils: JumpStencils,
    allowed: np.ndarray | None = None,
    record: bool = False,
    threads: int = 1,
):
    """Optimal withdrawal for every guarantee level.

    ``tables[i]`` is the post-withdrawal table for level ``A_i``.  Returns the
    pre-withdrawal tables and, if ``record``, the optimal withdrawal index
    ``l`` (amount ``l * dA``) at each node.  Levels are split into contiguous
    blocks across threads; each node is written by exactly one thread so the
    result does not depend on ``threads``.
    """
    tables = np.ascontiguousarray(tables, dtype=float)
    J = tables.shape[0]
    if stencils.base.shape[1] != J:
        raise ValueError("stencils were built for a different guarantee grid")
    if allowed is None:
        allowed = np.ones(J, dtype=np.bool_)
    allowed = np.ascontiguousarray(allowed, dtype=np.bool_)
    out = np.empty_like(tables)
    act = empty_actions(tables.shape if record else (1, 1, 1))
    args = (tables, stencils.base, stencils.weights, stencils.cash, allowed)
    threads = max(1, min(int(threads), J))
    if threads == 1:
        dynamic_jump_kernel(*args, 0, J, out, act, record)
    else:
        # level j has j + 1 candidates; balance contiguous blocks by that cost
        cost = np.cumsum(np.arange(1, J + 1))
        cuts = np.searchsorted(cost, cost[-1] * np.arange(1, threads) / threads)
        edges = [0, *cuts.tolist(), J]
        with ThreadPoolExecutor(threads) as pool:
            futures = [
                pool.submit(dynamic_jump_kernel, *args, lo, hi, out, act, record)
                for lo, hi in zip(edges[:-1], edges[1:])
                if hi > lo
            ]
            for f in futures:
                f.result()
    return out, (act if record else None)


def apply_jump_static(surface_after: ValueSurface, contract: GMWBContract, n: int, grids: Grids) -> ValueSurface:
    """Value just before date ``n`` given the value just after, static withdrawal ``G``.

    ``Q^-(W, r) = C(G) + Q^+(max(W - G, 0), r)``.
    """
    if not 1 <= n < contract.N:
        raise ValueError(f"withdrawal dates are 1..{contract.N - 1}, got {n}")
    out = jump_static_tables(surface_after.to_table()[None], grids, contract)[0]
    return ValueSurface.from_table(out, surface_after.guarantee_level, f"t{n}-")


def apply_jump_dynamic(
    surfaces_after,
    contract: GMWBContract,
    n: int,
    grids: Grids,
    allowed: np.ndarray | None = None,
    threads: int = 1,
):
    """Optimal-withdrawal jump on one surface per guarantee level.

    Returns ``(surfaces_before, actions)`` where ``actions[j]`` holds the
    optimal withdrawal amount at each node for level ``A_j``, as a table with
    the zero-wealth track in row 0.
    """
    if not 1 <= n < contract.N:
        raise ValueError(f"withdrawal dates are 1..{contract.N - 1}, got {n}")
    tables = np.stack([s.to_table() for s in surfaces_after])
    J = tables.shape[0]
    st = jump_stencils(grids, contract, J)
    out, act = jump_dynamic_tables(tables, st, allowed=allowed, record=True, threads=threads)
    surfaces = [ValueSurface.from_table(out[j], st.levels[j], f"t{n}-") for j in range(J)]
    return surfaces, st.levels[act]
