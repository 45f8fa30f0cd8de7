"""Scalar special functions, the scaled-chi law of sigma_hat/sigma, and
Gauss-Legendre quadrature helpers shared by the rest of the package."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import optimize, special

SQRT_2PI = math.sqrt(2.0 * math.pi)

# tail mass discarded at each end when truncating integrals over w
W_TAIL = 1e-10


class BracketError(ValueError):
    """Raised when a root-finding bracket has no sign change."""


@dataclass(frozen=True)
class ScaledChi:
    """Distribution of ``W = sqrt(Q / nu)`` with ``Q ~ chi2(nu)``.

    ``nu = math.inf`` stands for a point mass at 1 (sigma known, or an
    external estimate with effectively infinite degrees of freedom).
    """

    nu: float

    def __post_init__(self):
        nu = self.nu
        if not (nu == math.inf or (float(nu).is_integer() and nu >= 1)):
            raise ValueError(f"nu must be a positive integer or inf, got {nu!r}")

    @property
    def is_infinite(self) -> bool:
        return self.nu == math.inf

    def plus_one(self) -> "ScaledChi":
        """Law with one more degree of freedom (the reduced-model scale)."""
        return self if self.is_infinite else ScaledChi(self.nu + 1)

    def quantile(self, p: float) -> float:
        if self.is_infinite:
            return 1.0
        return math.sqrt(special.chdtri(self.nu, 1.0 - p) / self.nu)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple[float, float]

    def __post_init__(self):
        if len(self.nodes) < 1 or len(self.nodes) != len(self.weights):
            raise ValueError("nodes and weights must be non-empty and equally long")

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def normal_pdf(x):
    return np.exp(-0.5 * np.square(x)) / SQRT_2PI


def normal_cdf(x):
    """Standard normal distribution function (scipy's ``ndtr``, ~1e-16 abs error)."""
    return special.ndtr(x)


def normal_quantile(p):
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0.0) | (p_arr >= 1.0)) or np.any(np.isnan(p_arr)):
        raise ValueError(f"normal_quantile requires 0 < p < 1, got {p!r}")
    out = special.ndtri(p_arr)
    return float(out) if out.ndim == 0 else out


def chi_scaled_pdf(w, dist: ScaledChi):
    """Density of ``W = sqrt(Q/nu)``.

    ``f_W(w) = 2 (nu/2)^(nu/2) / Gamma(nu/2) * w^(nu-1) * exp(-nu w^2 / 2)``.
    The point-mass case has no density; callers must branch on
    ``dist.is_infinite`` themselves.
    """
    if dist.is_infinite:
        raise ValueError("chi_scaled_pdf is undefined for nu = inf (point mass at 1)")
    nu = dist.nu
    w = np.asarray(w, dtype=float)
    log_c = math.log(2.0) + 0.5 * nu * math.log(0.5 * nu) - math.lgamma(0.5 * nu)
    with np.errstate(divide="ignore"):
        logf = log_c + (nu - 1.0) * np.log(w) - 0.5 * nu * w * w
    out = np.where(w > 0, np.exp(logf), 0.0)
    return float(out) if out.ndim == 0 else out


def moment_w4(dist: ScaledChi) -> float:
    """E(W^4) = (nu + 2) / nu, since E(Q^2) = nu (nu + 2)."""
    if dist.is_infinite:
        return 1.0
    return (dist.nu + 2.0) / dist.nu


def gauss_legendre(n: int, a: float, b: float) -> QuadratureRule:
    if n < 2:
        raise ValueError("gauss_legendre needs n >= 2")
    if not a < b:
        raise ValueError(f"gauss_legendre needs a < b, got [{a}, {b}]")
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return QuadratureRule(half * x + 0.5 * (a + b), half * w, (a, b))


@lru_cache(maxsize=None)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def w_domain(dist: ScaledChi) -> tuple[float, float]:
    """Truncated support of W holding all but 2e-10 of its mass."""
    return dist.quantile(W_TAIL), dist.quantile(1.0 - W_TAIL)


@lru_cache(maxsize=64)
def w_rule(dist: ScaledChi, n: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and density-weighted weights for integrals ``E g(W)``.

    Returns ``(w, weights)`` with ``sum(weights * g(w)) ~ E g(W)``.  For the
    point mass this is the single node ``w = 1``.
    """
    if dist.is_infinite:
        nodes, weights = np.array([1.0]), np.array([1.0])
    else:
        rule = gauss_legendre(n, *w_domain(dist))
        nodes = rule.nodes
        weights = rule.weights * chi_scaled_pdf(rule.nodes, dist)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Root of a scalar function on a sign-changing bracket (Brent's method)."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(f"f({lo})={flo:g} and f({hi})={fhi:g} do not bracket a root")
    return optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


def t_cdf(x: float, nu: float) -> float:
    """Student t distribution function via the regularized incomplete beta."""
    if nu == math.inf:
        return float(normal_cdf(x))
    if x == 0.0:
        return 0.5
    tail = 0.5 * special.betainc(0.5 * nu, 0.5, nu / (nu + x * x))
    return float(1.0 - tail if x > 0 else tail)
