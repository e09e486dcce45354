"""Closed-form European vanilla prices under the joint asset/Vasicek model."""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import ndtr

from .model import ModelParams, _phi1, _phi2, bond_price

KINDS = ("call", "put")


@dataclass(frozen=True)
class VanillaAnalytics:
    sigma_eff2: float
    d1: float
    d2: float
    discount: float


def effective_variance(params: ModelParams, T: float) -> float:
    """Total variance of ln S(T) under the T-forward measure."""
    k, sS, sr = params.kappa, params.sigma_S, params.sigma_r
    x = k * T
    return sS * sS * T + sr * sr / (2 * k**3) * _phi2(x) + 2 * params.rho * sS * sr / (k * k) * _phi1(x)


def vanilla_analytics(
    params: ModelParams, strike: float, T: float, yield_rate: float = 0.0
) -> VanillaAnalytics:
    if not strike > 0:
        raise ValueError(f"strike must be positive, got {strike}")
    if not T > 0:
        raise ValueError(f"maturity must be positive, got {T}")
    discount = float(bond_price(params, params.r0, 0.0, T))
    v = effective_variance(params, T)
    if v > 0:
        s = math.sqrt(v)
        d1 = (math.log(params.S0 / strike) - yield_rate * T - math.log(discount) + 0.5 * v) / s
        d2 = d1 - s
    else:
        forward_gap = params.S0 * math.exp(-yield_rate * T) - strike * discount
        d1 = d2 = math.copysign(math.inf, forward_gap) if forward_gap != 0 else 0.0
    return VanillaAnalytics(sigma_eff2=v, d1=d1, d2=d2, discount=discount)


def vanilla_price(
    params: ModelParams, strike: float, T: float, kind: str = "call", yield_rate: float = 0.0
) -> float:
    """European call or put on S with strike ``strike`` and maturity ``T``.

    Black-Scholes with ``rT`` replaced by ``-ln P(0,T)`` and ``sigma^2 T`` by
    the effective variance.  With zero effective variance the price is the
    discounted intrinsic value of the forward.

    Parameters
    ----------
    yield_rate : float
        Continuous yield paid out by the asset (or a proportional fee charged
        on it).  The spot is replaced by ``S0 * exp(-yield_rate * T)``.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be 'call' or 'put', got {kind!r}")
    an = vanilla_analytics(params, strike, T, yield_rate)
    S0, KP = params.S0 * math.exp(-yield_rate * T), strike * an.discount
    if an.sigma_eff2 == 0:
        return max(S0 - KP, 0.0) if kind == "call" else max(KP - S0, 0.0)
    if kind == "call":
        return float(S0 * ndtr(an.d1) - KP * ndtr(an.d2))
    return float(KP * ndtr(-an.d2) - S0 * ndtr(-an.d1))
