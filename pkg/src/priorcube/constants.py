"""Critical constants for the standard and naive confidence cubes.

``d``        full-model constant: P(max_i |Z_i| / W <= d) = 1 - alpha, four
             independent standard normals.
``d_tilde``  reduced-model constant for the three-parameter fit with the
             interaction fixed at zero; its four cell-mean pivots are the
             correlated combinations in :data:`REDUCED_PIVOTS`.
``q``        two-sided threshold of the preliminary t test of no interaction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .stats import (
    ScaledChi,
    find_root,
    gauss_legendre,
    normal_quantile,
    t_cdf,
    w_rule,
)

# Rows map (Z1, Z2, Z3) to sqrt(3) * (Z~1, ..., Z~4).
REDUCED_PIVOTS = np.array(
    [
        [1.0, -1.0, -1.0],
        [1.0, 1.0, -1.0],
        [1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0],
    ]
) / math.sqrt(3.0)

_Z_CAP = 9.0
_N_W = 80
_N_Z = 40


@dataclass(frozen=True)
class CriticalConstants:
    d: float
    d_tilde: float
    q: float
    alpha: float
    nu: float
    test_level: float = 0.05

    def __post_init__(self):
        if not (self.d > 0 and self.d_tilde > 0 and self.q > 0):
            raise ValueError("critical constants must be positive")


def _check_level(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


def full_model_coverage(d: float, dist: ScaledChi) -> float:
    """P(max_i |Z_i| <= d W) = E[(2 Phi(d W) - 1)^4]."""
    w, wt = w_rule(dist, _N_W)
    return float(np.dot(wt, special.erf(d * w / math.sqrt(2.0)) ** 4))


def compute_d(alpha: float, dist: ScaledChi, tol: float = 1e-12) -> float:
    _check_level("alpha", alpha)
    if dist.is_infinite:
        return float(normal_quantile(0.5 * (1.0 + (1.0 - alpha) ** 0.25)))
    target = 1.0 - alpha
    hi = 1.0
    while full_model_coverage(hi, dist) < target:
        hi *= 2.0
    return find_root(lambda d: full_model_coverage(d, dist) - target, 0.0, hi, tol)


def reduced_box_probability(a: float, n: int = _N_Z) -> float:
    """P(max_i |Z~_i| <= a) for the correlated reduced-model pivots.

    With A = sqrt(3) a, the four constraints on z1 for fixed (z2, z3)
    intersect to ``|z1| <= A - |z2| - |z3|``, so the z1 integral is
    ``erf((A - |z2| - |z3|) / sqrt 2)``.  By symmetry the rest is four times
    a 2-D integral over the triangle z2, z3 >= 0, z2 + z3 <= A.
    """
    if a == math.inf:
        return 1.0
    if a <= 0.0:
        return 0.0
    big_a = math.sqrt(3.0) * a
    outer = gauss_legendre(n, 0.0, min(big_a, _Z_CAP))
    x, w = np.polynomial.legendre.leggauss(n)
    total = 0.0
    for z2, w2 in zip(outer.nodes, outer.weights):
        top = min(big_a - z2, _Z_CAP)
        z3 = 0.5 * top * (x + 1.0)
        inner = 0.5 * top * np.dot(
            w, special.erf((big_a - z2 - z3) / math.sqrt(2.0)) * np.exp(-0.5 * z3 * z3)
        )
        total += w2 * math.exp(-0.5 * z2 * z2) * inner
    return 4.0 * total / (2.0 * math.pi)


def reduced_model_coverage(d_tilde: float, dist_reduced: ScaledChi) -> float:
    w, wt = w_rule(dist_reduced, _N_W)
    return float(sum(p * reduced_box_probability(d_tilde * wi) for wi, p in zip(w, wt)))


def compute_d_tilde(alpha: float, dist_reduced: ScaledChi, tol: float = 1e-10) -> float:
    """Reduced-model constant; ``dist_reduced`` carries nu + 1 degrees of freedom."""
    _check_level("alpha", alpha)
    target = 1.0 - alpha
    hi = 1.0
    while reduced_model_coverage(hi, dist_reduced) < target:
        hi *= 2.0
    return find_root(lambda a: reduced_model_coverage(a, dist_reduced) - target, 0.0, hi, tol)


def compute_q(level: float, dist: ScaledChi, tol: float = 1e-12) -> float:
    """Upper ``level/2`` point of t_nu: reject no-interaction when |t| > q."""
    _check_level("level", level)
    if dist.is_infinite:
        return float(normal_quantile(1.0 - 0.5 * level))
    target = 1.0 - 0.5 * level
    hi = 1.0
    while t_cdf(hi, dist.nu) < target:
        hi *= 2.0
    return find_root(lambda x: t_cdf(x, dist.nu) - target, 0.0, hi, tol)


def critical_constants(alpha: float, dist: ScaledChi, test_level: float = 0.05) -> CriticalConstants:
    return CriticalConstants(
        d=compute_d(alpha, dist),
        d_tilde=compute_d_tilde(alpha, dist.plus_one()),
        q=compute_q(test_level, dist),
        alpha=alpha,
        nu=dist.nu,
        test_level=test_level,
    )

