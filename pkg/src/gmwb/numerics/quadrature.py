"""Gauss-Hermite rules and the variable changes that decorrelate a bivariate Normal."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_ORDER = 64
_PIM4 = math.pi**-0.25


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for ``int exp(-x^2) f(x) dx ~ sum w_i f(x_i)``."""

    q: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def _orthonormal_hermite(q: int, x: float) -> tuple[float, float]:
    """Values of the orthonormal Hermite functions of degree q and q-1 at x."""
    p1, p2 = _PIM4, 0.0
    for j in range(1, q + 1):
        p3 = p2
        p2 = p1
        p1 = x * math.sqrt(2.0 / j) * p2 - math.sqrt((j - 1) / j) * p3
    return p1, p2


@lru_cache(maxsize=None)
def _gauss_hermite(q: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    nodes = [0.0] * q
    weights = [0.0] * q
    m = (q + 1) // 2
    z = 0.0
    for i in range(m):
        # asymptotic initial guesses for the largest roots, then extrapolate
        if i == 0:
            z = math.sqrt(2 * q + 1) - 1.85575 * (2 * q + 1) ** (-0.16667)
        elif i == 1:
            z -= 1.14 * q**0.426 / z
        elif i == 2:
            z = 1.86 * z - 0.86 * nodes[0]
        elif i == 3:
            z = 1.91 * z - 0.91 * nodes[1]
        else:
            z = 2.0 * z - nodes[i - 2]
        for _ in range(100):
            p1, p2 = _orthonormal_hermite(q, z)
            pp = math.sqrt(2.0 * q) * p2
            step = p1 / pp
            z -= step
            if abs(step) <= 1e-15 * max(1.0, abs(z)):
                break
        else:
            raise RuntimeError(f"Newton iteration for Hermite root {i} of order {q} did not converge")
        p1, p2 = _orthonormal_hermite(q, z)
        pp = math.sqrt(2.0 * q) * p2
        nodes[i] = z
        nodes[q - 1 - i] = -z
        weights[i] = weights[q - 1 - i] = 2.0 / (pp * pp)
    if q % 2 == 1:
        nodes[m - 1] = 0.0
    return tuple(sorted(nodes)), tuple(w for _, w in sorted(zip(nodes, weights)))


def gauss_hermite(q: int) -> QuadratureRule:
    """Order-``q`` Gauss-Hermite rule, exact for polynomials of degree ``2q - 1``.

    Roots of H_q are found by Newton iteration on the orthonormal recurrence;
    weights follow from the derivative at each root.
    """
    if not isinstance(q, (int, np.integer)) or not 1 <= q <= MAX_ORDER:
        raise ValueError(f"quadrature order must be an integer in [1, {MAX_ORDER}], got {q!r}")
    nodes, weights = _gauss_hermite(int(q))
    return QuadratureRule(q=int(q), nodes=np.array(nodes), weights=np.array(weights))


@dataclass(frozen=True)
class RotationCoefficients:
    a: float
    b: float


def rotation_coefficients(rho_xr: float) -> RotationCoefficients:
    """Principal-axes factor of the 2x2 correlation matrix: [[a, b], [b, a]]."""
    if abs(rho_xr) > 1:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho_xr}")
    sp, sm = math.sqrt(1.0 + rho_xr), math.sqrt(1.0 - rho_xr)
    return RotationCoefficients(a=0.5 * (sp + sm), b=0.5 * (sp - sm))


def rotate(rho_xr: float, z1, z2):
    """Map independent (z1, z2) to (y1, y2) with correlation ``rho_xr``.

    Both outputs carry the factor sqrt(2) that turns the exp(-z^2) weight into
    a standard Normal density.
    """
    c = rotation_coefficients(rho_xr)
    z1, z2 = np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)
    return math.sqrt(2) * (c.a * z1 + c.b * z2), math.sqrt(2) * (c.b * z1 + c.a * z2)


def cholesky_map(rho_xr: float, z1, z2):
    if abs(rho_xr) > 1:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho_xr}")
    z1, z2 = np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)
    c = math.sqrt(max(0.0, 1.0 - rho_xr * rho_xr))
    return math.sqrt(2) * z1, math.sqrt(2) * (rho_xr * z1 + c * z2)


TRANSFORMS = {"rotation": rotate, "cholesky": cholesky_map}


def product_rule(q1: int, q2: int, rho_xr: float, transform: str = "rotation"):
    """Standardised 2-d points (y1, y2) and normalised weights for a bivariate Normal.

    ``sum(w * f(y1, y2))`` approximates ``E[f(Y1, Y2)]`` for standard Normals
    with correlation ``rho_xr``; weights sum to one.  Points are ordered with the
    first index outer, second inner.
    """
    if transform not in TRANSFORMS:
        raise ValueError(f"transform must be one of {sorted(TRANSFORMS)}, got {transform!r}")
    r1, r2 = gauss_hermite(q1), gauss_hermite(q2)
    z1, z2 = np.meshgrid(r1.nodes, r2.nodes, indexing="ij")
    y1, y2 = TRANSFORMS[transform](rho_xr, z1.ravel(), z2.ravel())
    w = np.outer(r1.weights, r2.weights).ravel() / math.pi
    return y1, y2, w
