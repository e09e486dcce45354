from .operator import ExpectationOperator, build_operator, node_points
from .pricing import (
    PricingResult,
    deterministic_params,
    price_deterministic_rate,
    price_dynamic,
    price_static,
    price_vanilla,
)
from .fees import FEE_MODES, FairFeeResult, NoFairFee, fair_fee
