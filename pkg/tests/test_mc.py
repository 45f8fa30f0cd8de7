import math

import numpy as np
import pytest

from priorcube.mc import mc_coverage, mc_sev
from priorcube.tuning import BSFunctions, TuningSpec


def test_standard_coverage(cc_c2):
    fns = BSFunctions.standard(cc_c2.d, 0.05, 4)
    est = mc_coverage(0.0, fns, n=1_000_000, seed=1)
    assert abs(est.value - 0.95) <= 3.5 * est.std_error
    assert est.std_error == pytest.approx(math.sqrt(est.value * (1 - est.value) / 1e6), rel=1e-3)


def test_standard_sev_constant(cc_c2, cc_inf):
    est = mc_sev(1.0, BSFunctions.standard(cc_inf.d, 0.05, math.inf), n=10_000)
    assert est.value == pytest.approx(1.0, abs=1e-12) and est.std_error == pytest.approx(0.0, abs=1e-12)
    # with finite df W varies, so the estimate of E W^4 / E W^4 is only 1 on average
    est = mc_sev(1.0, BSFunctions.standard(cc_c2.d, 0.05, 4), n=1_000_000)
    assert abs(est.value - 1.0) <= 3.5 * est.std_error


def test_naive_dip(naive_c2):
    est = mc_coverage(1.45, naive_c2, n=1_000_000, seed=2)
    assert abs(est.value - 0.9078) <= 3.5 * est.std_error + 1e-3


@pytest.mark.parametrize("gamma", [0.7, 1.5, 3.0])
def test_even_in_gamma(gamma, naive_c2):
    a = mc_coverage(gamma, naive_c2, n=500_000, seed=4)
    b = mc_coverage(-gamma, naive_c2, n=500_000, seed=5)
    assert abs(a.value - b.value) <= 3.5 * math.hypot(a.std_error, b.std_error)


def test_large_gamma_sev(cc_c2):
    rng = np.random.default_rng(0)
    spec = TuningSpec.evenly_spaced(8.0, 0.08)
    fns = BSFunctions.spline(spec, rng.uniform(-1, 1, 5), rng.uniform(0.8, 1.1, 6) * cc_c2.d, cc_c2.d, 0.05, 4)
    est = mc_sev(spec.r + 10, fns, n=1_000_000)
    assert abs(est.value - 1.0) <= 3.5 * est.std_error + 1e-3


def test_seeded_determinism(naive_c2):
    a = mc_coverage(1.0, naive_c2, n=300_000, seed=9)
    b = mc_coverage(1.0, naive_c2, n=300_000, seed=9)
    c = mc_coverage(1.0, naive_c2, n=300_000, seed=10)
    assert a == b and a.value != c.value
    assert mc_sev(1.0, naive_c2, n=50_000, seed=9) == mc_sev(1.0, naive_c2, n=50_000, seed=9)


def test_minimum_replications(naive_c2):
    with pytest.raises(ValueError):
        mc_coverage(0.0, naive_c2, n=9_999)
    with pytest.raises(ValueError):
        mc_sev(0.0, naive_c2, n=100)


def test_config_mismatch(naive_c2, cfg_inf):
    with pytest.raises(ValueError):
        mc_coverage(0.0, naive_c2, cfg_inf)
