"""Pricing of variable annuities with a guaranteed minimum withdrawal benefit
under a Vasicek short rate, by Gauss-Hermite quadrature and cubic splines."""
from .analytic import vanilla_price
from .contract import GMWBContract
from .engine import (
    FairFeeResult,
    NoFairFee,
    PricingResult,
    fair_fee,
    price_deterministic_rate,
    price_dynamic,
    price_static,
    price_vanilla,
)
from .grids import COARSE, FINE, VANILLA, GridSpec
from .mc import MCConfig, MCResult, mc_price_static, mc_vanilla
from .model import ModelParams, bond_price, joint_moments, q_tilde_moments

__all__ = [
    "COARSE",
    "FINE",
    "VANILLA",
    "FairFeeResult",
    "GMWBContract",
    "GridSpec",
    "MCConfig",
    "MCResult",
    "ModelParams",
    "NoFairFee",
    "PricingResult",
    "bond_price",
    "fair_fee",
    "joint_moments",
    "mc_price_static",
    "mc_vanilla",
    "price_deterministic_rate",
    "price_dynamic",
    "price_static",
    "price_vanilla",
    "q_tilde_moments",
    "vanilla_price",
]
