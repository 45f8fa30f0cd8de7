"""Direct simulation of coverage and scaled expected volume.

Draws the pivots ``T1, T2, T3 ~ N(0, 1)``, ``H ~ N(gamma, 1)`` and ``W``
independently and checks the four-interval cube event literally.  Nothing
here goes through the quadrature code, so it serves as an independent check
on :mod:`priorcube.performance`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .model import ModelConfig
from .stats import ScaledChi, moment_w4
from .tuning import BSFunctions

BATCH = 200_000


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n_reps: int
    seed: int


def _normals(rng: np.random.Generator, size) -> np.ndarray:
    # inverse-CDF transform of 53-bit uniforms on the open interval (0, 1)
    u = (np.floor(rng.random(size) * 2.0**53) + 0.5) / 2.0**53
    return special.ndtri(u)


def _scale_draws(rng, dist: ScaledChi, n: int) -> np.ndarray:
    if dist.is_infinite:
        return np.ones(n)
    z = _normals(rng, (int(dist.nu), n))
    return np.sqrt(np.sum(z * z, axis=0) / dist.nu)


def _batches(n: int, seed: int):
    for k, start in enumerate(range(0, n, BATCH)):
        yield np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, k]))), min(BATCH, n - start)


def _dist(fns: BSFunctions, config: ModelConfig | None) -> ScaledChi:
    if config is not None and config.nu != fns.nu:
        raise ValueError(f"functions built for nu={fns.nu}, config has nu={config.nu}")
    return ScaledChi(fns.nu)


def cube_event(gamma: float, fns: BSFunctions, t: np.ndarray, h: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Indicator that the cube covers the true cell means, per replicate."""
    g1 = 0.5 * (t[0] - t[1] - t[2] + h - gamma)
    g2 = 0.5 * (t[0] + t[1] - t[2] - h + gamma)
    g3 = 0.5 * (t[0] - t[1] + t[2] - h + gamma)
    g4 = 0.5 * (t[0] + t[1] + t[2] + h - gamma)
    lo, up = fns.lower_upper(h, w)
    return (
        (lo <= g1) & (g1 <= up)
        & (lo <= -g2) & (-g2 <= up)
        & (lo <= -g3) & (-g3 <= up)
        & (lo <= g4) & (g4 <= up)
    )


def _estimate(samples_sum: float, samples_sq: float, n: int, seed: int) -> McEstimate:
    mean = samples_sum / n
    var = max(samples_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return McEstimate(mean, math.sqrt(var / n), n, seed)


def mc_coverage(gamma: float, fns: BSFunctions, config: ModelConfig | None = None,
                n: int = 1_000_000, seed: int = 0) -> McEstimate:
    if n < 10_000:
        raise ValueError("n must be at least 10^4")
    dist = _dist(fns, config)
    hits = 0
    for rng, size in _batches(n, seed):
        t = _normals(rng, (3, size))
        h = gamma + _normals(rng, size)
        w = _scale_draws(rng, dist, size)
        hits += int(np.count_nonzero(cube_event(gamma, fns, t, h, w)))
    return _estimate(hits, hits, n, seed)


def mc_sev(gamma: float, fns: BSFunctions, config: ModelConfig | None = None,
           n: int = 1_000_000, seed: int = 0) -> McEstimate:
    if n < 10_000:
        raise ValueError("n must be at least 10^4")
    dist = _dist(fns, config)
    norm = fns.d ** 4 * moment_w4(dist)
    total = total_sq = 0.0
    for rng, size in _batches(n, seed):
        h = gamma + _normals(rng, size)
        w = _scale_draws(rng, dist, size)
        v = (w * fns.s(np.abs(h) / w)) ** 4 / norm
        total += float(v.sum())
        total_sq += float(np.dot(v, v))
    return _estimate(total, total_sq, n, seed)
