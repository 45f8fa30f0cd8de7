"""Quadrature kernels for coverage and scaled expected volume.

Conditionally on ``H = h``, ``W = w`` and ``T3 = t``, the cube event reduces to
``T1 - T2`` and ``T1 + T2`` (independent N(0, 2)) each lying in an interval of
the form ``[|m| - R, R - |m|]`` with ``R = 2 s w`` and ``m = t +- delta``,
``delta = 2 b w - h + gamma``.  Each factor is therefore
``erf((R - |m|) / 2)``, and the t-integral

    K(delta, R) = int erf((R - |t + delta|)/2)_+ erf((R - |t - delta|)/2)_+ phi(t) dt

is even in t with kinks only at ``t = |delta|`` and ``t = R - |delta|``.
It is integrated on ``[0, |delta|]`` and ``[|delta|, R - |delta|]`` with a
Gauss-Legendre rule on each smooth piece.

Every kernel exists twice: ``*_nb`` (numba, scalar loops) and ``*_np``
(vectorised numpy).  The public names are bound to one of them according to
:mod:`priorcube._backend`.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from ._backend import HAS_NUMBA, USE_NUMBA, njit

T_CAP = 8.5
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@njit
def box_mass_nb(delta, R, tn, tw):
    D = abs(delta)
    if R <= D:
        return 0.0
    hi = R - D
    total = 0.0
    a = min(D, hi, T_CAP)
    if a > 0.0:
        for i in range(tn.size):
            t = a * tn[i]
            total += a * tw[i] * math.erf(0.5 * (R - t - D)) * math.erf(0.5 * (R - D + t)) * math.exp(-0.5 * t * t)
    if D < hi and D < T_CAP:
        L = min(hi, T_CAP) - D
        for i in range(tn.size):
            t = D + L * tn[i]
            total += L * tw[i] * math.erf(0.5 * (R - t - D)) * math.erf(0.5 * (R - t + D)) * math.exp(-0.5 * t * t)
    return 2.0 * total * INV_SQRT_2PI


@njit
def coverage_excess_nb(gammas, ws, wwts, xs, xwts, bx, sx, d, tn, tw):
    out = np.zeros(gammas.size)
    for g in range(gammas.size):
        gamma = gammas[g]
        total = 0.0
        for i in range(ws.size):
            w = ws[i]
            R0 = 2.0 * d * w
            acc = 0.0
            for j in range(xs.size):
                h = w * xs[j]
                e = h - gamma
                dens = math.exp(-0.5 * e * e)
                if dens < 1e-300:
                    continue
                R = 2.0 * sx[j] * w
                k_new = box_mass_nb(2.0 * bx[j] * w - h + gamma, R, tn, tw)
                k_std = box_mass_nb(gamma - h, R0, tn, tw)
                acc += xwts[j] * dens * (k_new - k_std)
            total += wwts[i] * w * acc
        out[g] = total * INV_SQRT_2PI
    return out


@njit
def volume_excess_nb(gammas, ws, wwts, xs, xwts, s4_minus_d4):
    out = np.zeros(gammas.size)
    for g in range(gammas.size):
        gamma = gammas[g]
        total = 0.0
        for i in range(ws.size):
            w = ws[i]
            acc = 0.0
            for j in range(xs.size):
                e = w * xs[j] - gamma
                acc += xwts[j] * s4_minus_d4[j] * math.exp(-0.5 * e * e)
            total += wwts[i] * w ** 5 * acc
        out[g] = total * INV_SQRT_2PI
    return out


def box_mass_np(delta, R, tn, tw):
    D = np.abs(np.asarray(delta, dtype=float))
    R = np.broadcast_to(np.asarray(R, dtype=float), D.shape)
    hi = R - D
    alive = R > D

    a = np.clip(np.minimum(D, hi), 0.0, T_CAP)
    t = a[..., None] * tn
    f1 = special.erf(0.5 * (R[..., None] - t - D[..., None])) * special.erf(
        0.5 * (R[..., None] - D[..., None] + t)
    )
    piece1 = a * np.sum(tw * f1 * np.exp(-0.5 * t * t), axis=-1)

    L = np.where((D < hi) & (D < T_CAP), np.minimum(hi, T_CAP) - D, 0.0)
    t = D[..., None] + L[..., None] * tn
    f2 = special.erf(0.5 * (R[..., None] - t - D[..., None])) * special.erf(
        0.5 * (R[..., None] - t + D[..., None])
    )
    piece2 = L * np.sum(tw * f2 * np.exp(-0.5 * t * t), axis=-1)
    return np.where(alive, 2.0 * (piece1 + piece2) * INV_SQRT_2PI, 0.0)


def coverage_excess_np(gammas, ws, wwts, xs, xwts, bx, sx, d, tn, tw):
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    w = ws[:, None]
    h = w * xs[None, :]
    R = 2.0 * sx[None, :] * w
    R0 = np.broadcast_to(2.0 * d * w, h.shape)
    out = np.empty(gammas.size)
    for g, gamma in enumerate(gammas):
        dens = np.exp(-0.5 * (h - gamma) ** 2)
        diff = box_mass_np(2.0 * bx[None, :] * w - h + gamma, R, tn, tw) - box_mass_np(gamma - h, R0, tn, tw)
        acc = np.sum(xwts[None, :] * dens * diff, axis=1)
        out[g] = np.dot(wwts * ws, acc) * INV_SQRT_2PI
    return out


def volume_excess_np(gammas, ws, wwts, xs, xwts, s4_minus_d4):
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    e = ws[None, :, None] * xs[None, None, :] - gammas[:, None, None]
    acc = np.sum(xwts * s4_minus_d4 * np.exp(-0.5 * e * e), axis=2)
    return acc @ (wwts * ws ** 5) * INV_SQRT_2PI


if USE_NUMBA:
    box_mass, coverage_excess, volume_excess = box_mass_nb, coverage_excess_nb, volume_excess_nb
else:
    box_mass, coverage_excess, volume_excess = box_mass_np, coverage_excess_np, volume_excess_np

__all__ = [
    "HAS_NUMBA",
    "USE_NUMBA",
    "box_mass",
    "coverage_excess",
    "volume_excess",
    "box_mass_nb",
    "box_mass_np",
    "coverage_excess_nb",
    "coverage_excess_np",
    "volume_excess_nb",
    "volume_excess_np",
]
