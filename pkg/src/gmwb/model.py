"""Correlated Vasicek short rate and lognormal asset: closed-form distributions.

Dynamics under the risk-neutral measure Q::

    dS/S = r dt + sigma_S (rho dB1 + sqrt(1 - rho^2) dB2)
    dr   = kappa (theta - r) dt + sigma_r dB1

Changing numeraire to the zero-coupon bond maturing at ``T'`` gives the
measure referred to here as ``"Q~"``; under it the discounted expectation over
one period factorises into ``P(t, T') * E~[...]``.  Every quantity below is
Gaussian and known in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MEASURES = ("Q", "Q~")

# below this value of kappa*t the exponential combinations switch to series
_SERIES_CUTOFF = 0.05


def _b(x: float) -> float:
    """1 - exp(-x) without cancellation."""
    return -math.expm1(-x)


def _phi1(x: float) -> float:
    """x - 1 + exp(-x)."""
    if abs(x) < _SERIES_CUTOFF:
        total, term = 0.0, 1.0
        for n in range(1, 16):
            term *= -x / n
            if n >= 2:
                total += term
        return total
    return x + math.expm1(-x)


def _phi2(x: float) -> float:
    """2x - 3 + 4 exp(-x) - exp(-2x)."""
    if abs(x) < _SERIES_CUTOFF:
        total, fact = 0.0, 1.0
        for n in range(1, 18):
            fact *= n
            if n >= 3:
                total += (-1) ** n * (4.0 - 2.0**n) * x**n / fact
        return total
    return 2.0 * x + 4.0 * math.expm1(-x) - math.expm1(-2.0 * x)


@dataclass(frozen=True)
class ModelParams:
    """Asset and Vasicek parameters together with the spot state."""

    sigma_S: float
    rho: float
    kappa: float
    theta: float
    sigma_r: float
    S0: float = 1.0
    r0: float = 0.05

    def __post_init__(self):
        for name in ("sigma_S", "rho", "kappa", "theta", "sigma_r", "S0", "r0"):
            value = getattr(self, name)
            if callable(value):
                raise TypeError(f"{name} must be a constant; time-dependent parameters are not supported")
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.sigma_S <= 0:
            raise ValueError(f"sigma_S must be positive, got {self.sigma_S}")
        if self.sigma_r < 0:
            raise ValueError(f"sigma_r must be non-negative, got {self.sigma_r}")
        if abs(self.rho) > 1:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.S0 <= 0:
            raise ValueError(f"S0 must be positive, got {self.S0}")

    @property
    def deterministic_rate(self) -> bool:
        return self.sigma_r == 0.0


@dataclass(frozen=True)
class BondCoefficients:
    B: float
    A: float
    tau: float


@dataclass(frozen=True)
class TransitionMoments:
    """Bivariate Normal law of (ln W(t_n^-), r(t_n)) given (x*, r*) under Q~.

    ``mean_x(x*, r*) = x* + mu_x_intercept + mu_x_slope_r * r*`` and
    ``mean_r(r*) = mu_r_intercept + mu_r_slope * r*``.
    """

    mu_r_intercept: float
    mu_r_slope: float
    tau_r2: float
    mu_x_intercept: float
    mu_x_slope_r: float
    tau_x2: float
    rho_xr: float
    delta: float
    b_n: float
    a_n: float
    cov_xr: float
    degenerate_rate: bool

    def mean_r(self, r):
        return self.mu_r_intercept + self.mu_r_slope * np.asarray(r, dtype=float)

    def mean_x(self, x, r):
        return np.asarray(x, dtype=float) + self.mu_x_intercept + self.mu_x_slope_r * np.asarray(r, dtype=float)

    @property
    def tau_x(self) -> float:
        return math.sqrt(self.tau_x2)

    @property
    def tau_r(self) -> float:
        return math.sqrt(self.tau_r2)


@dataclass(frozen=True)
class JointMoments3:
    """Mean and covariance of (ln S(t), r(t), Y(t)) with Y(t) = int_0^t r du."""

    t: float
    measure: str
    mean_lnS: float
    var_lnS: float
    mean_r: float
    var_r: float
    mean_Y: float
    var_Y: float
    cov_lnS_r: float
    cov_Y_r: float
    cov_lnS_Y: float

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mean_lnS, self.mean_r, self.mean_Y])

    @property
    def cov(self) -> np.ndarray:
        return np.array(
            [
                [self.var_lnS, self.cov_lnS_r, self.cov_lnS_Y],
                [self.cov_lnS_r, self.var_r, self.cov_Y_r],
                [self.cov_lnS_Y, self.cov_Y_r, self.var_Y],
            ]
        )


def _check_finite(**values):
    for name, value in values.items():
        if not np.all(np.isfinite(value)):
            raise ValueError(f"{name} must be finite, got {value!r}")


def bond_coefficients(params: ModelParams, t: float, T: float) -> BondCoefficients:
    _check_finite(t=t, T=T)
    if t > T:
        raise ValueError(f"bond valuation time t={t} is after maturity T={T}")
    tau = T - t
    k, sr2 = params.kappa, params.sigma_r**2
    B = _b(k * tau) / k
    # B - tau = -phi1(k tau)/k keeps precision for small k*tau
    A = -(params.theta - sr2 / (2 * k * k)) * _phi1(k * tau) / k - sr2 / (4 * k) * B * B
    return BondCoefficients(B=B, A=A, tau=tau)


def bond_price(params: ModelParams, r, t: float, T: float):
    """Zero-coupon bond price ``P(t, T) = exp(A - r B)``; vectorised over ``r``."""
    _check_finite(r=r)
    c = bond_coefficients(params, t, T)
    if c.tau == 0.0:
        return np.ones_like(np.asarray(r, dtype=float))[()]
    return np.exp(c.A - np.asarray(r, dtype=float) * c.B)[()]


def q_tilde_moments(
    params: ModelParams, alpha: float, delta: float, numeraire_maturity: float | None = None
) -> TransitionMoments:
    """One-period transition law of (ln W, r) under the bond-numeraire measure.

    ``numeraire_maturity`` is measured from the start of the period and defaults
    to ``delta`` (bond maturing at the period end).  The fee ``alpha`` enters
    as a drag ``-alpha * delta`` on the log-wealth mean.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    Tn = delta if numeraire_maturity is None else numeraire_maturity
    if Tn < delta:
        raise ValueError("numeraire maturity must not precede the period end")
    k, th = params.kappa, params.theta
    sS, sr, rho = params.sigma_S, params.sigma_r, params.rho
    sr2 = sr * sr
    x = k * delta
    b = _b(x)
    a = _b(2 * x)
    e_rem = math.exp(-k * (Tn - delta))  # e^{-k(T'-delta)}
    e_T = math.exp(-k * Tn)

    mu_r_slope = math.exp(-x)
    mu_r_intercept = th * b + sr2 / (2 * k * k) * (a * e_rem - 2 * b)
    tau_r2 = sr2 * a / (2 * k)

    # I_1 = (b/k)(r* - th + sr2/(2k^2)(2 - e^{-kT'} + e^{-k(T'-delta)})) + (th - sr2/k^2) delta
    mu_x_slope_r = b / k
    i1_const = (b / k) * (-th + sr2 / (2 * k * k) * (2 - e_T + e_rem)) + (th - sr2 / (k * k)) * delta
    # e^{-kT'}(e^{k delta} - 1) = e_rem * b
    kappa_term = x - e_rem * b
    mu_x_intercept = (
        i1_const
        - rho * sS * sr / (k * k) * kappa_term
        - (alpha + 0.5 * sS * sS) * delta
    )
    tau_x2 = sS * sS * delta + sr2 / (2 * k**3) * _phi2(x) + 2 * rho * sS * sr / (k * k) * _phi1(x)
    cov_xr = rho * sS * sr * b / k + sr2 / (2 * k * k) * b * b

    degenerate = tau_r2 == 0.0
    if degenerate:
        rho_xr = 0.0
    else:
        rho_xr = max(-1.0, min(1.0, cov_xr / math.sqrt(tau_x2 * tau_r2)))
    return TransitionMoments(
        mu_r_intercept=mu_r_intercept,
        mu_r_slope=mu_r_slope,
        tau_r2=tau_r2,
        mu_x_intercept=mu_x_intercept,
        mu_x_slope_r=mu_x_slope_r,
        tau_x2=tau_x2,
        rho_xr=rho_xr,
        delta=delta,
        b_n=b,
        a_n=a,
        cov_xr=cov_xr,
        degenerate_rate=degenerate,
    )


def joint_moments(
    params: ModelParams, t: float, measure: str = "Q", numeraire_maturity: float | None = None
) -> JointMoments3:
    """Moments of (ln S(t), r(t), Y(t)) started from (S0, r0).

    With ``measure="Q~"`` the numeraire is the bond maturing at
    ``numeraire_maturity`` (default ``t``).  Covariances do not depend on the
    measure.
    """
    if not t > 0:
        raise ValueError(f"horizon t must be positive, got {t}")
    if measure not in MEASURES:
        raise ValueError(f"measure must be one of {MEASURES}, got {measure!r}")
    k, th = params.kappa, params.theta
    sS, sr, rho = params.sigma_S, params.sigma_r, params.rho
    sr2 = sr * sr
    x = k * t
    b, a = _b(x), _b(2 * x)
    r0 = params.r0

    mean_r = r0 * math.exp(-x) + th * b
    mean_Y = (b / k) * (r0 - th) + th * t
    mean_lnS = math.log(params.S0) + mean_Y - 0.5 * sS * sS * t
    if measure == "Q~":
        Tn = t if numeraire_maturity is None else numeraire_maturity
        if Tn < t:
            raise ValueError("numeraire maturity must not precede the horizon")
        e_rem = math.exp(-k * (Tn - t))
        e_T = math.exp(-k * Tn)
        mean_r += sr2 / (2 * k * k) * (a * e_rem - 2 * b)
        dY = (b / k) * sr2 / (2 * k * k) * (2 - e_T + e_rem) - sr2 / (k * k) * t
        mean_Y += dY
        mean_lnS += dY - rho * sS * sr / (k * k) * (x - e_rem * b)

    var_r = sr2 * a / (2 * k)
    var_Y = sr2 / (2 * k**3) * _phi2(x)
    var_lnS = sS * sS * t + var_Y + 2 * rho * sS * sr / (k * k) * _phi1(x)
    cov_Y_r = sr2 / (2 * k * k) * b * b
    cov_lnS_r = rho * sS * sr * b / k + cov_Y_r
    cov_lnS_Y = rho * sS * sr / (k * k) * _phi1(x) + var_Y
    return JointMoments3(
        t=t,
        measure=measure,
        mean_lnS=mean_lnS,
        var_lnS=var_lnS,
        mean_r=mean_r,
        var_r=var_r,
        mean_Y=mean_Y,
        var_Y=var_Y,
        cov_lnS_r=cov_lnS_r,
        cov_Y_r=cov_Y_r,
        cov_lnS_Y=cov_lnS_Y,
    )


def q_measure_joint_moments(params: ModelParams, t: float) -> JointMoments3:
    return joint_moments(params, t, measure="Q")


@dataclass(frozen=True)
class PeriodLaw:
    """Conditional Q-law of the increments (d ln S, r_end, Y) over one period.

    Means are affine in the starting short rate: ``intercept + slope * r``.
    """

    delta: float
    intercept: np.ndarray
    slope: np.ndarray
    cov: np.ndarray


def q_period_law(params: ModelParams, delta: float) -> PeriodLaw:
    k, th, sS = params.kappa, params.theta, params.sigma_S
    b = _b(k * delta)
    slope = np.array([b / k, math.exp(-k * delta), b / k])
    y0 = th * (delta - b / k)
    intercept = np.array([y0 - 0.5 * sS * sS * delta, th * b, y0])
    cov = joint_moments(params, delta, "Q").cov
    return PeriodLaw(delta=delta, intercept=intercept, slope=slope, cov=cov)
