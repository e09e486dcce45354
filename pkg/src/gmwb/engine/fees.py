"""Fair fee: the fee at which the contract is worth exactly the premium."""
from __future__ import annotations

from dataclasses import dataclass

from scipy.optimize import brentq

from ..contract import GMWBContract
from ..grids import FINE, GridSpec
from ..model import ModelParams
from .pricing import price_deterministic_rate, price_dynamic, price_static

FEE_MODES = ("static", "dynamic", "deterministic-static", "deterministic-dynamic")


class NoFairFee(ValueError):
    """The price minus premium does not change sign on the fee bracket."""


@dataclass(frozen=True)
class FairFeeResult:
    alpha: float
    evaluations: int
    price_at_zero: float

    @property
    def bp(self) -> float:
        return self.alpha * 1e4


def pricer(mode: str, spec: GridSpec = FINE, J: int = 100, threads: int = 1):
    """Return ``f(params, contract) -> price`` for one of ``FEE_MODES``."""
    if mode == "static":
        return lambda p, c: price_static(p, c, spec, threads).price
    if mode == "dynamic":
        return lambda p, c: price_dynamic(p, c, spec, J, threads).price
    if mode == "deterministic-static":
        return lambda p, c: price_deterministic_rate(p, c, spec, "static", J, threads).price
    if mode == "deterministic-dynamic":
        return lambda p, c: price_deterministic_rate(p, c, spec, "dynamic", J, threads).price
    raise ValueError(f"mode must be one of {FEE_MODES}, got {mode!r}")


def fair_fee(
    params: ModelParams,
    contract: GMWBContract,
    spec: GridSpec = FINE,
    mode: str = "static",
    J: int = 100,
    bracket: tuple[float, float] = (0.0, 0.05),
    xtol: float = 1e-5,
    threads: int = 1,
) -> FairFeeResult:
    """Solve ``price(alpha) = premium`` by Brent's method on ``bracket``.

    The price decreases in the fee, so a root exists when the contract is
    worth at least the premium at the lower end and at most at the upper end.
    ``xtol = 1e-5`` is 0.1 basis point.
    """
    f_price = pricer(mode, spec, J, threads)
    calls = 0

    def excess(alpha):
        nonlocal calls
        calls += 1
        return f_price(params, contract.with_fee(alpha)) - contract.premium

    lo, hi = bracket
    f_lo = excess(lo)
    if f_lo < 0:
        raise NoFairFee(f"price at fee {lo} is below the premium by {-f_lo:.3g}; no fair fee in bracket")
    f_hi = excess(hi)
    if f_hi > 0:
        raise NoFairFee(f"price at fee {hi} still exceeds the premium by {f_hi:.3g}; widen the bracket")
    alpha = brentq(excess, lo, hi, xtol=xtol)
    return FairFeeResult(alpha=alpha, evaluations=calls, price_at_zero=f_lo + contract.premium)
