"""Monte Carlo prices from the exact Gaussian transition law (no time-stepping error).

Paths are generated in fixed-size blocks.  Block ``b`` draws from its own
Philox stream seeded by ``(seed, b)``, so a path's random numbers do not
depend on how blocks are scheduled, and block sums are combined in block
order.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .contract import GMWBContract
from .model import ModelParams, joint_moments, q_period_law

BLOCK = 1 << 16
DEFAULT_SEED = 12345


@dataclass(frozen=True)
class MCConfig:
    n_paths: int = 1_000_000
    seed: int = DEFAULT_SEED
    antithetic: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.n_paths < 2:
            raise ValueError(f"n_paths must be at least 2, got {self.n_paths}")
        if self.antithetic and self.n_paths % 2:
            raise ValueError("antithetic sampling needs an even number of paths")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class MCResult:
    price: float
    stderr: float
    n_paths: int
    elapsed: float


def guarded_cholesky(cov: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Lower Cholesky factor of a PSD matrix; pivots in ``(-tol, 0]`` become 0."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0]
    L = np.zeros_like(cov)
    for j in range(n):
        d = cov[j, j] - L[j, :j] @ L[j, :j]
        if d < -tol:
            raise np.linalg.LinAlgError(f"covariance is not positive semidefinite (pivot {d:.3e})")
        L[j, j] = math.sqrt(max(d, 0.0))
        for i in range(j + 1, n):
            s = cov[i, j] - L[i, :j] @ L[j, :j]
            L[i, j] = s / L[j, j] if L[j, j] > 0 else 0.0
    return L


def _normals(rng: np.random.Generator, n: int, dim: int, antithetic: bool) -> np.ndarray:
    if antithetic:
        z = rng.standard_normal((n // 2, dim))
        return np.concatenate([z, -z])
    return rng.standard_normal((n, dim))


def _block_sizes(n_paths: int) -> list[int]:
    full, rest = divmod(n_paths, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def _reduce(samples_fn, config: MCConfig) -> MCResult:
    """Run blocks, returning mean and standard error of the per-path samples.

    With antithetic sampling the statistic is computed over pair averages.
    """
    t0 = time.perf_counter()
    sizes = _block_sizes(config.n_paths)

    def run(b):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([config.seed, b])))
        x = samples_fn(rng, sizes[b])
        if config.antithetic:
            h = x.size // 2
            x = 0.5 * (x[:h] + x[h:])
        return x.size, float(np.sum(x)), float(np.sum(x * x))

    n_thr = max(1, min(config.threads, len(sizes)))
    if n_thr == 1:
        parts = [run(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(n_thr) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    n = sum(p[0] for p in parts)
    s1 = math.fsum(p[1] for p in parts)
    s2 = math.fsum(p[2] for p in parts)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1)
    return MCResult(mean, math.sqrt(var / n), config.n_paths, time.perf_counter() - t0)


def mc_price_static(
    params: ModelParams,
    contract: GMWBContract,
    config: MCConfig = MCConfig(),
    strategy: str = "static",
) -> MCResult:
    """Static-withdrawal contract value by simulation under the risk-neutral measure.

    Each period draws (log-return of S, end rate, integrated rate) from their
    exact conditional Normal law; wealth earns the asset return less the fee,
    then pays the contractual amount.  The sample is the discounted sum of
    cashflows plus the discounted terminal payoff ``max(W_T, G)``.
    """
    if not isinstance(contract, GMWBContract):
        raise TypeError("contract must be a GMWBContract")
    if strategy != "static":
        # optimal withdrawals depend on the value function, which forward
        # simulation does not know
        raise ValueError(f"simulation supports the static strategy only, got {strategy!r}")
    law = q_period_law(params, contract.delta)
    L = guarded_cholesky(law.cov)
    N, G, premium = contract.N, contract.G, contract.premium
    drag = contract.alpha * contract.delta

    def samples(rng, n):
        W = np.full(n, premium)
        r = np.full(n, params.r0)
        Y = np.zeros(n)
        value = np.zeros(n)
        for step in range(1, N + 1):
            z = _normals(rng, n, 3, config.antithetic)
            inc = law.intercept + np.outer(r, law.slope) + z @ L.T
            W = W * np.exp(inc[:, 0] - drag)
            r = inc[:, 1]
            Y = Y + inc[:, 2]
            disc = np.exp(-Y)
            if step < N:
                W = np.maximum(W - G, 0.0)
                value += disc * G
            else:
                value += disc * np.maximum(W, G)
        return value

    return _reduce(samples, config)


def mc_vanilla(
    params: ModelParams,
    strike: float,
    T: float,
    kind: str = "call",
    config: MCConfig = MCConfig(),
    yield_rate: float = 0.0,
) -> MCResult:
    """European option by one-shot sampling of (ln S(T), Y(T)) from their joint law."""
    if kind not in ("call", "put"):
        raise ValueError(f"kind must be 'call' or 'put', got {kind!r}")
    if not strike > 0 or not T > 0:
        raise ValueError("strike and maturity must be positive")
    jm = joint_moments(params, T, "Q")
    idx = [0, 2]
    mean = jm.mean[idx] - np.array([yield_rate * T, 0.0])
    L = guarded_cholesky(jm.cov[np.ix_(idx, idx)])
    sign = 1.0 if kind == "call" else -1.0

    def samples(rng, n):
        x = mean + _normals(rng, n, 2, config.antithetic) @ L.T
        return np.exp(-x[:, 1]) * np.maximum(sign * (np.exp(x[:, 0]) - strike), 0.0)

    return _reduce(samples, config)


def mc_identities(params: ModelParams, T: float, config: MCConfig = MCConfig()):
    """Sample means of ``exp(-Y(T)) S(T)`` and ``exp(-Y(T))`` with standard errors."""
    jm = joint_moments(params, T, "Q")
    idx = [0, 2]
    L = guarded_cholesky(jm.cov[np.ix_(idx, idx)])
    out = {}
    for name, f in (("discounted_asset", lambda x: np.exp(x[:, 0] - x[:, 1])), ("discount", lambda x: np.exp(-x[:, 1]))):
        out[name] = _reduce(lambda rng, n, f=f: f(jm.mean[idx] + _normals(rng, n, 2, config.antithetic) @ L.T), config)
    return out
