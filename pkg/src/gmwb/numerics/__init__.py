from .quadrature import (
    QuadratureRule,
    RotationCoefficients,
    cholesky_map,
    gauss_hermite,
    product_rule,
    rotate,
    rotation_coefficients,
)
from .spline import (
    NaturalSpline1D,
    Spline1D,
    Spline2D,
    UniformGrid,
    build_spline1d,
    spline1d_build,
    spline1d_eval,
    spline2d_build,
    spline2d_eval,
    spline_weights,
)
