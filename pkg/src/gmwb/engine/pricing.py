"""Backward induction over withdrawal dates."""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..analytic import KINDS
from ..contract import GMWBContract, cashflow, jump_dynamic_tables, jump_static_tables, jump_stencils
from ..grids import FINE, VANILLA, GridSpec, Grids, build_grids
from ..model import ModelParams, q_tilde_moments
from .operator import ExpectationOperator, build_operator, node_points

MODES = ("static", "dynamic")


@dataclass
class PricingResult:
    """Time-0 value plus diagnostics.

    ``actions`` (dynamic mode with ``record_actions``) maps each withdrawal
    date index to an array ``(J, M + 2, K + 1)`` of optimal withdrawal
    amounts; row 0 of each table is the zero-wealth track.
    """

    price: float
    grids: Grids
    elapsed: float
    levels: np.ndarray | None = None
    actions: dict[int, np.ndarray] = field(default_factory=dict)


class _Stepper:
    """Builds and caches the expectation operators of a run.

    With stochastic rates one operator serves every sub-step.  With a
    deterministic rate the single rate node follows the rate path, so the
    operator depends on the date and is cached by rate value.
    """

    def __init__(self, params: ModelParams, grids: Grids, spec: GridSpec, alpha: float, delta: float, threads: int):
        self.params, self.grids, self.spec = params, grids, spec
        self.moments = q_tilde_moments(params, alpha, delta)
        self.threads = max(1, int(threads))
        self._cache: dict[tuple, ExpectationOperator] = {}

    def rate_at(self, t: float) -> float:
        p = self.params
        return p.theta + (p.r0 - p.theta) * math.exp(-p.kappa * t)

    def operator(self, t_start: float, final: bool) -> ExpectationOperator:
        g = self.grids
        if final:
            x, r = np.zeros(1), np.full(1, self.params.r0)
            key = ("final",)
        else:
            r_nodes = np.array([self.rate_at(t_start)]) if g.degenerate_rate else None
            x, r = node_points(g, r_nodes)
            key = ("nodes", float(r[0]) if g.degenerate_rate else None)
        if key not in self._cache:
            self._cache[key] = build_operator(
                self.params, g, self.moments, self.spec.q1, self.spec.q2, x, r, self.spec.transform
            )
        return self._cache[key]

    def apply(self, op: ExpectationOperator, flat: np.ndarray) -> np.ndarray:
        """``flat`` has shape ``(n_in, S)``; columns are split across threads."""
        S = flat.shape[1]
        n = min(self.threads, S)
        if n == 1:
            return op.apply(flat)
        edges = np.linspace(0, S, n + 1).astype(int)
        with ThreadPoolExecutor(n) as pool:
            parts = list(pool.map(lambda e: op.apply(flat[:, e[0] : e[1]]), zip(edges[:-1], edges[1:])))
        return np.hstack(parts)


def _backward(
    params: ModelParams,
    grids: Grids,
    spec: GridSpec,
    alpha: float,
    T: float,
    n_periods: int,
    payoffs,
    jump,
    threads: int,
) -> np.ndarray:
    """Generic backward sweep.

    ``payoffs`` is a list of wealth payoff functions, one per surface.
    ``jump(n, tables)`` maps post-withdrawal tables ``(S, M + 2, K + 1)`` at
    date ``n`` to pre-withdrawal tables.  Returns the time-0 values at
    ``(X = 0, r0)``, one per surface.
    """
    delta = T / n_periods
    sub = delta / spec.N_dt
    st = _Stepper(params, grids, spec, alpha, sub, threads)
    R, K1 = grids.shape
    flat = None
    total = n_periods * spec.N_dt
    for s in range(total, 0, -1):
        t_start = (s - 1) * sub
        op = st.operator(t_start, final=(s == 1))
        if flat is None:
            flat = np.stack([op.apply_payoff(f) for f in payoffs], axis=1)
        else:
            flat = st.apply(op, flat)
        n, rem = divmod(s - 1, spec.N_dt)
        if rem == 0 and n >= 1:
            tables = np.ascontiguousarray(flat.T.reshape(-1, R, K1))
            tables = jump(n, tables)
            flat = np.ascontiguousarray(tables.reshape(tables.shape[0], -1).T)
    return flat[0]


def _check(params: ModelParams, contract: GMWBContract, spec: GridSpec):
    if not isinstance(params, ModelParams) or not isinstance(contract, GMWBContract):
        raise TypeError("expected ModelParams and GMWBContract")
    if not isinstance(spec, GridSpec):
        raise TypeError("spec must be a GridSpec")


def price_static(
    params: ModelParams, contract: GMWBContract, spec: GridSpec = FINE, threads: int = 1
) -> PricingResult:
    """Contract value when exactly the contractual amount is withdrawn at every date."""
    _check(params, contract, spec)
    t0 = time.perf_counter()
    grids = build_grids(params, contract.T, contract.alpha, spec, W0=contract.premium)
    G = contract.G
    payoff = lambda W: np.maximum(W, G)  # noqa: E731

    def jump(n, tables):
        return jump_static_tables(tables, grids, contract)

    v = _backward(params, grids, spec, contract.alpha, contract.T, contract.N, [payoff], jump, threads)
    return PricingResult(price=float(v[0]), grids=grids, elapsed=time.perf_counter() - t0)


def price_dynamic(
    params: ModelParams,
    contract: GMWBContract,
    spec: GridSpec = FINE,
    J: int = 100,
    threads: int = 1,
    record_actions: bool = False,
    allowed: np.ndarray | None = None,
) -> PricingResult:
    """Contract value under the value-maximising withdrawal strategy.

    Withdrawals are restricted to differences of the uniform guarantee grid
    with ``J`` levels.  ``allowed`` optionally masks the candidate withdrawal
    indices ``l`` (amount ``l * premium / (J - 1)``).
    """
    _check(params, contract, spec)
    if J < 2:
        raise ValueError(f"J must be at least 2, got {J}")
    t0 = time.perf_counter()
    grids = build_grids(params, contract.T, contract.alpha, spec, W0=contract.premium)
    st = jump_stencils(grids, contract, J)
    final_cash = cashflow(contract, contract.N, st.levels)
    payoffs = [(lambda W, c=c: np.maximum(W, c)) for c in final_cash]
    actions: dict[int, np.ndarray] = {}

    def jump(n, tables):
        out, act = jump_dynamic_tables(tables, st, allowed=allowed, record=record_actions, threads=threads)
        if record_actions:
            actions[n] = st.levels[act]
        return out

    v = _backward(params, grids, spec, contract.alpha, contract.T, contract.N, payoffs, jump, threads)
    return PricingResult(
        price=float(v[-1]), grids=grids, elapsed=time.perf_counter() - t0, levels=st.levels, actions=actions
    )


def deterministic_params(params: ModelParams) -> ModelParams:
    """Same model with the short rate frozen at ``r0``."""
    return replace(params, sigma_r=0.0, theta=params.r0)


def price_deterministic_rate(
    params: ModelParams,
    contract: GMWBContract,
    spec: GridSpec = FINE,
    mode: str = "static",
    J: int = 100,
    threads: int = 1,
) -> PricingResult:
    """Price with the short rate held constant at ``r0`` (one-dimensional quadrature)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    det = deterministic_params(params)
    if mode == "static":
        return price_static(det, contract, spec, threads)
    return price_dynamic(det, contract, spec, J, threads)


def price_vanilla(
    params: ModelParams,
    strike: float,
    T: float,
    kind: str = "call",
    spec: GridSpec = VANILLA,
    yield_rate: float = 0.0,
) -> PricingResult:
    """European option on the asset through the quadrature engine (no withdrawals).

    ``spec.N_dt`` sets the number of time steps to maturity.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be 'call' or 'put', got {kind!r}")
    if not strike > 0 or not T > 0:
        raise ValueError("strike and maturity must be positive")
    t0 = time.perf_counter()
    grids = build_grids(params, T, yield_rate, spec, W0=params.S0)
    if kind == "call":
        payoff = lambda W: np.maximum(W - strike, 0.0)  # noqa: E731
    else:
        payoff = lambda W: np.maximum(strike - W, 0.0)  # noqa: E731
    v = _backward(params, grids, spec, yield_rate, T, 1, [payoff], lambda n, t: t, 1)
    return PricingResult(price=float(v[0]), grids=grids, elapsed=time.perf_counter() - t0)
