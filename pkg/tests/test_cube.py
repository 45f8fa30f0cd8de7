import math

import numpy as np
import pytest

from priorcube.constants import critical_constants
from priorcube.cube import (
    DataError,
    FactorialDataset,
    fit,
    general_cube,
    naive_cube,
    naive_cube_explicit,
    standard_cube,
)
from priorcube.model import ConfigurationError, ModelConfig
from priorcube.tuning import BSFunctions

WORKED_EXAMPLE = [87.2, 88.4, 86.7, 89.2]


def random_dataset(rng, c, scale=1.0):
    return FactorialDataset.from_cell_values([rng.normal(10, scale, c) for _ in range(4)])


def test_fit_worked_example(cfg_inf):
    data = FactorialDataset.from_cell_values(WORKED_EXAMPLE, external_sigma_hat=0.8)
    est = fit(data, cfg_inf)
    np.testing.assert_allclose(est.theta_hat, WORKED_EXAMPLE, rtol=0, atol=1e-12)
    assert est.beta_hat[3] == pytest.approx((87.2 - 88.4 - 86.7 + 89.2) / 4, abs=1e-12)
    assert est.beta_hat[3] == pytest.approx(0.325, abs=1e-12)
    assert est.sigma_hat == 0.8 and est.sigma_tilde == 0.8
    assert est.t_stat == pytest.approx(0.8125, abs=1e-12)


def test_fit_constant_cells(cfg_c2):
    est = fit(FactorialDataset.from_cell_values([[5.0, 5.0]] * 4), cfg_c2)
    np.testing.assert_array_equal(est.beta_hat, [5.0, 0, 0, 0])
    assert est.sigma_hat == 0.0 and est.t_stat == 0.0


@pytest.mark.parametrize("seed", range(20))
def test_theta_linear_identities(seed):
    rng = np.random.default_rng(seed)
    c = int(rng.integers(2, 6))
    cfg = ModelConfig.internal(c)
    est = fit(random_dataset(rng, c), cfg)
    b0, b1, b2, b12 = est.beta_hat
    expected = [b0 - b1 - b2 + b12, b0 + b1 - b2 - b12, b0 - b1 + b2 - b12, b0 + b1 + b2 + b12]
    np.testing.assert_allclose(est.theta_hat, expected, atol=1e-12)


def test_fit_matches_least_squares(rng):
    c = 3
    data = random_dataset(rng, c)
    cfg = ModelConfig.internal(c)
    est = fit(data, cfg)
    rows, ys = [], []
    for (x1, x2), obs in data.responses.items():
        for y in obs:
            rows.append([1, x1, x2, x1 * x2])
            ys.append(y)
    X, y = np.array(rows, float), np.array(ys)
    beta, rss, *_ = np.linalg.lstsq(X, y, rcond=None)
    np.testing.assert_allclose(est.beta_hat, beta, atol=1e-12)
    assert est.sigma_hat**2 == pytest.approx(rss[0] / (4 * c - 4), rel=1e-12)
    v = np.linalg.inv(X.T @ X)
    assert cfg.v55 == pytest.approx(v[3, 3], rel=1e-12)
    assert cfg.v11 == pytest.approx(np.array([1, -1, -1, 1]) @ v @ np.array([1, -1, -1, 1]), rel=1e-12)
    sigma_tilde2 = ((4 * c - 4) * est.sigma_hat**2 + est.beta_hat[3] ** 2 / cfg.v55) / (4 * c - 3)
    assert est.sigma_tilde**2 == pytest.approx(sigma_tilde2, rel=1e-12)


def test_fit_errors(cfg_c2):
    with pytest.raises(ConfigurationError):
        ModelConfig.internal(1)
    data = FactorialDataset.from_cell_values([[1.0, 2.0]] * 4)
    with pytest.raises(ConfigurationError):
        fit(data, ModelConfig.internal(3))
    with pytest.raises(ConfigurationError, match="external"):
        fit(data, ModelConfig.external(math.inf, c=2))
    with pytest.raises(ConfigurationError):
        fit(FactorialDataset.from_cell_values([[1.0, 2.0]] * 4, external_sigma_hat=1.0), cfg_c2)


def test_unbalanced_cells_listed():
    with pytest.raises(DataError, match=r"unbalanced.*1.*2"):
        FactorialDataset({(-1, -1): [1.0], (1, -1): [1.0, 2.0], (-1, 1): [1.0], (1, 1): [1.0]})


def test_read_csv(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x1,x2,y\n-1,-1,87.2\n1,-1,88.4\n-1,1,86.7\n1,1,89.2\n")
    data = FactorialDataset.read_csv(p, external_sigma_hat=0.8)
    np.testing.assert_allclose(data.cell_means(), WORKED_EXAMPLE)
    p.write_text("a,b,y\n")
    with pytest.raises(DataError, match="header"):
        FactorialDataset.read_csv(p)
    p.write_text("x1,x2,y\n0,1,3\n")
    with pytest.raises(DataError, match="-1 or 1"):
        FactorialDataset.read_csv(p)
    p.write_text("x1,x2,y\n1,1,abc\n")
    with pytest.raises(DataError, match="parse"):
        FactorialDataset.read_csv(p)


def test_standard_cube_worked_example(cfg_inf, cc_inf):
    est = fit(FactorialDataset.from_cell_values(WORKED_EXAMPLE, external_sigma_hat=0.8), cfg_inf)
    cube = standard_cube(est, cc_inf, cfg_inf)
    assert cube.half_width == pytest.approx(1.99272, abs=5e-5)
    np.testing.assert_allclose(cube.centers, WORKED_EXAMPLE)
    assert cube.volume_ratio_vs_standard == 1.0
    assert cube.volume == pytest.approx((2 * cube.half_width) ** 4)
    assert len({hw for _, hw in cube.intervals}) == 1


def test_zero_sigma_gives_point_cube(cfg_inf, cc_inf):
    est = fit(FactorialDataset.from_cell_values(WORKED_EXAMPLE, external_sigma_hat=0.0), cfg_inf)
    cube = standard_cube(est, cc_inf, cfg_inf)
    assert cube.half_width == 0.0 and cube.volume == 0.0


def test_general_cube_worked_example(cfg_inf, opt_inf):
    est = fit(FactorialDataset.from_cell_values(WORKED_EXAMPLE, external_sigma_hat=0.8), cfg_inf)
    cube = general_cube(est, opt_inf.fns, cfg_inf)
    assert cube.half_width == pytest.approx(1.88504, abs=5e-3)
    np.testing.assert_allclose(cube.centers, [87.1748, 88.4252, 86.7252, 89.1748], atol=5e-3)
    assert cube.sqrt_volume_ratio == pytest.approx(0.8948, abs=3e-3)
    shift = cube.centers - np.array(WORKED_EXAMPLE)
    assert np.array_equal(np.sign(shift), [-1, 1, 1, -1])


def test_general_standard_is_standard_bitwise(cfg_c2, cc_c2, rng):
    fns = BSFunctions.standard(cc_c2.d, 0.05, 4)
    for _ in range(20):
        est = fit(random_dataset(rng, 2), cfg_c2)
        a, b = general_cube(est, fns, cfg_c2), standard_cube(est, cc_c2, cfg_c2)
        assert a.intervals == b.intervals and a.volume == b.volume


def test_zero_interaction_keeps_centres(cfg_c2, opt_inf, cc_c2):
    data = FactorialDataset.from_cell_values([[1.0, 2.0], [3.0, 5.0], [2.0, 4.0], [4.0, 7.0]])
    est = fit(data, cfg_c2)
    assert est.beta_hat[3] == 0.0
    fns = BSFunctions.spline(opt_inf.fns.spec, opt_inf.fns.b_values, opt_inf.fns.s_values, cc_c2.d, 0.05, 4)
    np.testing.assert_array_equal(general_cube(est, fns, cfg_c2).centers, est.theta_hat)


def test_naive_eq2_matches_explicit_1000(cc_c2, cfg_c2):
    rng = np.random.default_rng(2024)
    seen = {True: 0, False: 0}
    for _ in range(1000):
        data = FactorialDataset.from_cell_values([rng.normal(0, 1, 2) + rng.normal(0, 1.5) for _ in range(4)])
        est = fit(data, cfg_c2)
        a = naive_cube(est, cc_c2, cfg_c2)
        b = naive_cube_explicit(est, cc_c2, cfg_c2)
        assert a.accepted == b.accepted
        seen[a.accepted] += 1
        for (ca, ha), (cb, hb) in zip(a.intervals, b.intervals):
            assert abs(ca - cb) <= 1e-10 and abs(ha - hb) <= 1e-10
    assert seen[True] > 50 and seen[False] > 50


def test_naive_rejection_branch_is_standard(cc_c2, cfg_c2):
    data = FactorialDataset.from_cell_values([[0.0, 0.1], [0.0, 0.1], [0.0, 0.1], [5.0, 5.1]])
    est = fit(data, cfg_c2)
    assert abs(est.t_stat) > cc_c2.q
    assert naive_cube(est, cc_c2, cfg_c2).intervals == standard_cube(est, cc_c2, cfg_c2).intervals


def test_naive_boundary_accepts(cc_c2, cfg_c2):
    est = fit(FactorialDataset.from_cell_values([[0.0, 1.0]] * 4), cfg_c2)
    # place t exactly at q by choosing beta12 = q * sigma_hat * sqrt(v55)
    b12 = cc_c2.q * est.sigma_hat * math.sqrt(cfg_c2.v55)
    beta = np.array([0.0, 0.0, 0.0, b12])
    theta = np.array([b12, -b12, -b12, b12])
    from priorcube.cube import Estimates
    est_q = Estimates(beta, theta, est.sigma_hat, est.sigma_hat, cc_c2.q)
    cube = naive_cube(est_q, cc_c2, cfg_c2)
    assert cube.accepted is True
    np.testing.assert_allclose(cube.centers, theta + np.array([-1, 1, 1, -1]) * b12, atol=1e-12)


def test_naive_external_finite_df():
    cfg = ModelConfig.external(10, c=2)
    cc = critical_constants(0.05, cfg.dist)
    data = FactorialDataset.from_cell_values([[1.0, 1.2], [2.0, 2.1], [1.5, 1.4], [2.4, 2.6]], external_sigma_hat=0.3)
    est = fit(data, cfg)
    expected = math.sqrt((10 * 0.09 + est.beta_hat[3] ** 2 / cfg.v55) / 11)
    assert est.sigma_tilde == pytest.approx(expected, rel=1e-14)
    a, b = naive_cube(est, cc, cfg), naive_cube_explicit(est, cc, cfg)
    np.testing.assert_allclose([hw for _, hw in a.intervals], [hw for _, hw in b.intervals], atol=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_location_and_scale_equivariance(seed, cfg_c2, cc_c2, opt_inf):
    rng = np.random.default_rng(seed)
    fns = BSFunctions.spline(opt_inf.fns.spec, opt_inf.fns.b_values, opt_inf.fns.s_values, cc_c2.d, 0.05, 4)
    cells = [rng.normal(0, 1, 2) for _ in range(4)]
    base = general_cube(fit(FactorialDataset.from_cell_values(cells), cfg_c2), fns, cfg_c2)
    k, lam = float(rng.normal(0, 50)), float(rng.uniform(0.1, 10))
    moved = general_cube(fit(FactorialDataset.from_cell_values([c + k for c in cells]), cfg_c2), fns, cfg_c2)
    np.testing.assert_allclose(moved.centers, base.centers + k, atol=1e-9)
    assert moved.half_width == pytest.approx(base.half_width, abs=1e-9)
    scaled = general_cube(fit(FactorialDataset.from_cell_values([c * lam for c in cells]), cfg_c2), fns, cfg_c2)
    np.testing.assert_allclose(scaled.centers, base.centers * lam, atol=1e-9)
    assert scaled.half_width == pytest.approx(base.half_width * lam, rel=1e-12)
