import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmwb.analytic import effective_variance, vanilla_price
from gmwb.mc import MCConfig, mc_vanilla
from gmwb.model import ModelParams, bond_price, joint_moments
from oracles import euler_q_paths, mean_z

BASE = ModelParams(sigma_S=0.2, rho=0.0, kappa=0.0349, theta=0.05, sigma_r=0.02, S0=1.0, r0=0.05)

params_st = st.builds(
    ModelParams,
    sigma_S=st.floats(0.05, 0.6),
    rho=st.floats(-1.0, 1.0),
    kappa=st.floats(0.01, 2.0),
    theta=st.floats(0.0, 0.12),
    sigma_r=st.floats(0.0, 0.05),
    S0=st.floats(0.5, 2.0),
    r0=st.floats(0.0, 0.12),
)

# published call / put prices: strike 0.95, maturity 1 year, 2% asset yield
PUBLISHED = [
    (0.01, -0.2, 0.119063, 0.042547),
    (0.01, 0.0, 0.119404, 0.042888),
    (0.01, 0.2, 0.119743, 0.043227),
    (0.03, -0.2, 0.118531, 0.042132),
    (0.03, 0.0, 0.119554, 0.043156),
    (0.03, 0.2, 0.120565, 0.044167),
]


@pytest.mark.parametrize("sigma_r,rho,call,put", PUBLISHED)
def test_published_closed_form(sigma_r, rho, call, put):
    p = replace(BASE, sigma_r=sigma_r, rho=rho)
    assert vanilla_price(p, 0.95, 1.0, "call", yield_rate=0.02) == pytest.approx(call, abs=6e-7)
    assert vanilla_price(p, 0.95, 1.0, "put", yield_rate=0.02) == pytest.approx(put, abs=6e-7)


@settings(max_examples=1000)
@given(params_st, st.floats(0.3, 3.0), st.floats(0.05, 15.0), st.floats(0.0, 0.05))
def test_put_call_parity(p, K, T, q):
    c = vanilla_price(p, K, T, "call", q)
    pu = vanilla_price(p, K, T, "put", q)
    fwd = p.S0 * math.exp(-q * T) - K * bond_price(p, p.r0, 0.0, T)
    scale = p.S0 * math.exp(-q * T) + K * bond_price(p, p.r0, 0.0, T)
    assert abs((c - pu) - fwd) <= 1e-12 * scale


@settings(max_examples=20)
@given(params_st, st.floats(0.5, 2.0), st.floats(0.1, 10.0))
def test_nondecreasing_in_asset_volatility(p, K, T):
    h = 1e-4
    for kind in ("call", "put"):
        lo = vanilla_price(p, K, T, kind)
        hi = vanilla_price(replace(p, sigma_S=p.sigma_S + h), K, T, kind)
        assert hi >= lo - 1e-13


@given(params_st, st.floats(0.3, 3.0), st.floats(1e-3, 0.5), st.floats(0.1, 10.0))
def test_monotone_in_strike(p, K, dK, T):
    assert vanilla_price(p, K + dK, T, "call") <= vanilla_price(p, K, T, "call") + 1e-14
    assert vanilla_price(p, K + dK, T, "put") >= vanilla_price(p, K, T, "put") - 1e-14


def test_zero_effective_variance_gives_discounted_intrinsic():
    p = replace(BASE, sigma_r=0.0)
    v = effective_variance(p, 1.0)
    assert v == pytest.approx(p.sigma_S**2)
    tiny = replace(p, sigma_S=1e-300)  # variance underflows to zero
    P = bond_price(tiny, tiny.r0, 0.0, 1.0)
    assert vanilla_price(tiny, 0.9, 1.0, "call") == pytest.approx(1.0 - 0.9 * P, rel=1e-12)
    assert vanilla_price(tiny, 0.9, 1.0, "put") == 0.0


def test_effective_variance_is_forward_log_variance():
    p = replace(BASE, rho=0.4)
    assert effective_variance(p, 3.0) == pytest.approx(joint_moments(p, 3.0, "Q~").var_lnS, rel=1e-14)


@pytest.mark.parametrize("kind", ["call", "put"])
def test_against_exact_law_simulation(kind):
    p = replace(BASE, rho=0.2, sigma_r=0.03)
    ref = vanilla_price(p, 0.95, 1.0, kind)
    m = mc_vanilla(p, 0.95, 1.0, kind, MCConfig(n_paths=400_000))
    assert abs(m.price - ref) < 3 * m.stderr


def test_against_euler_simulation():
    p = replace(BASE, rho=-0.5, sigma_r=0.03)
    paths = euler_q_paths(p, 2.0, n_steps=200, n_paths=200_000, seed=41)
    payoff = np.exp(-paths[:, 2]) * np.maximum(np.exp(paths[:, 0]) - 1.0, 0.0)
    assert abs(mean_z(payoff, vanilla_price(p, 1.0, 2.0, "call"))) < 3


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        vanilla_price(BASE, 1.0, 1.0, "straddle")
    with pytest.raises(ValueError):
        vanilla_price(BASE, 0.0, 1.0)
    with pytest.raises(ValueError):
        vanilla_price(BASE, 1.0, -1.0)
