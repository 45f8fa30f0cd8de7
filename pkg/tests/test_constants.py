import math

import numpy as np
import pytest
from scipy import stats as sps

from priorcube.constants import (
    REDUCED_PIVOTS,
    compute_d,
    compute_d_tilde,
    compute_q,
    critical_constants,
    full_model_coverage,
    reduced_box_probability,
    reduced_model_coverage,
)
from priorcube.stats import ScaledChi, normal_quantile

INF = ScaledChi(math.inf)
N_MC = 10_000_000


def _mc_fraction_below(stat_fn, threshold, n=N_MC, batch=1_000_000, seed=7):
    """Fraction of simulated statistics <= threshold, with its standard error."""
    rng = np.random.default_rng(seed)
    hits = 0
    for start in range(0, n, batch):
        hits += int(np.count_nonzero(stat_fn(rng, min(batch, n - start)) <= threshold))
    p = hits / n
    return p, math.sqrt(p * (1 - p) / n)


def _scale(rng, nu, size):
    return np.sqrt(rng.chisquare(nu, size) / nu)


def test_d_infinite_closed_form():
    d = compute_d(0.05, INF)
    assert d == pytest.approx(normal_quantile((1 + 0.95**0.25) / 2), abs=1e-15)
    assert 0.8 * d == pytest.approx(1.99272, abs=5e-4)
    assert d == pytest.approx(2.49090, abs=1e-4)


def test_d_nu4_monte_carlo():
    # the empirical CDF of max|Z_i|/W at d should be 0.95 within 3 standard errors
    d = compute_d(0.05, ScaledChi(4))
    p, se = _mc_fraction_below(
        lambda rng, k: np.abs(rng.standard_normal((4, k))).max(axis=0) / _scale(rng, 4, k), d
    )
    assert abs(p - 0.95) <= 3 * se


def test_d_tilde_nu5_monte_carlo():
    dt = compute_d_tilde(0.05, ScaledChi(5))
    p, se = _mc_fraction_below(
        lambda rng, k: np.abs(REDUCED_PIVOTS @ rng.standard_normal((3, k))).max(axis=0) / _scale(rng, 5, k),
        dt, seed=11,
    )
    assert abs(p - 0.95) <= 3 * se


def test_reduced_pivots_unit_variance():
    np.testing.assert_allclose(np.sum(REDUCED_PIVOTS**2, axis=1), 1.0, rtol=1e-15)
    corr = REDUCED_PIVOTS @ REDUCED_PIVOTS.T
    off = corr[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(np.abs(off), 1 / 3, rtol=1e-14)


def test_reduced_box_probability_limits_and_mc():
    assert reduced_box_probability(math.inf) == 1.0
    assert reduced_box_probability(0.0) == 0.0
    rng = np.random.default_rng(3)
    z = np.abs(REDUCED_PIVOTS @ rng.standard_normal((3, 2_000_000))).max(axis=0)
    for a in (1.0, 2.0, 2.5):
        p = np.mean(z <= a)
        assert reduced_box_probability(a) == pytest.approx(p, abs=4 * math.sqrt(p * (1 - p) / z.size))


def test_d_self_consistency():
    for nu in (4, 8, math.inf):
        dist = ScaledChi(nu)
        assert full_model_coverage(compute_d(0.05, dist), dist) == pytest.approx(0.95, abs=1e-6)
    dist = ScaledChi(5)
    assert reduced_model_coverage(compute_d_tilde(0.05, dist), dist) == pytest.approx(0.95, abs=1e-6)


def test_d_monotone_in_alpha_and_nu():
    alphas = [0.01, 0.05, 0.1, 0.2]
    ds = [compute_d(a, ScaledChi(8)) for a in alphas]
    assert all(b < a for a, b in zip(ds, ds[1:]))
    nus = [2, 4, 8, 24, 76, math.inf]
    ds = [compute_d(0.05, ScaledChi(n)) for n in nus]
    assert all(b < a for a, b in zip(ds, ds[1:]))


def test_d_small_as_alpha_near_one():
    assert compute_d(1 - 1e-9, ScaledChi(4)) < 1e-2
    assert compute_d(1 - 1e-9, INF) < 1e-2


@pytest.mark.parametrize("nu", [4, 8, 24, 76])
def test_d_tilde_below_d(nu):
    assert compute_d_tilde(0.05, ScaledChi(nu + 1)) < compute_d(0.05, ScaledChi(nu))


def test_q_values():
    assert compute_q(0.05, ScaledChi(4)) == pytest.approx(2.7764, abs=1e-3)
    assert compute_q(0.05, ScaledChi(4)) == pytest.approx(sps.t.ppf(0.975, 4), abs=1e-10)
    assert compute_q(0.05, INF) == pytest.approx(1.95996, abs=1e-4)
    assert compute_q(1 - 1e-9, ScaledChi(4)) < 1e-6


def test_q_monte_carlo():
    rng = np.random.default_rng(5)
    t = rng.standard_normal(2_000_000) / _scale(rng, 4, 2_000_000)
    assert compute_q(0.05, ScaledChi(4)) == pytest.approx(np.quantile(np.abs(t), 0.95), abs=0.02)


def test_critical_constants_bundle():
    cc = critical_constants(0.05, ScaledChi(4))
    assert cc.nu == 4 and cc.alpha == 0.05
    assert cc.d == pytest.approx(compute_d(0.05, ScaledChi(4)))
    assert cc.d_tilde == pytest.approx(compute_d_tilde(0.05, ScaledChi(5)))
    assert cc.q == pytest.approx(compute_q(0.05, ScaledChi(4)))


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5, 1.5])
def test_invalid_alpha(alpha):
    with pytest.raises(ValueError):
        compute_d(alpha, INF)
