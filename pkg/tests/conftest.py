import math

import numpy as np
import pytest

from priorcube.constants import critical_constants
from priorcube.model import ModelConfig
from priorcube.optimizer import OptimizationProblem, optimize
from priorcube.tuning import BSFunctions, TuningSpec

INF = math.inf


@pytest.fixture(scope="session")
def cfg_c2():
    return ModelConfig.internal(2)


@pytest.fixture(scope="session")
def cc_c2(cfg_c2):
    return critical_constants(0.05, cfg_c2.dist)


@pytest.fixture(scope="session")
def cfg_inf():
    return ModelConfig.external(INF)


@pytest.fixture(scope="session")
def cc_inf(cfg_inf):
    return critical_constants(0.05, cfg_inf.dist)


@pytest.fixture(scope="session")
def naive_c2(cc_c2):
    return BSFunctions.naive(cc_c2)


@pytest.fixture(scope="session")
def opt_inf(cfg_inf, cc_inf):
    """Optimized functions for nu = inf, r = 6, lambda = 0.08 (a few seconds)."""
    spec = TuningSpec.evenly_spaced(6.0, 0.08, 7)
    return optimize(OptimizationProblem(spec, cfg_inf, cc_inf), stream=None)


@pytest.fixture(scope="session")
def opt_c2(cfg_c2, cc_c2):
    """Optimized functions for c = 2, r = 8, lambda = 0.08 (about two minutes)."""
    spec = TuningSpec.evenly_spaced(8.0, 0.08, 7)
    return optimize(OptimizationProblem(spec, cfg_c2, cc_c2), stream=None)


def random_spline(rng, spec, d, alpha, nu, b_scale=0.5, s_lo=0.6, s_hi=1.2):
    b = rng.uniform(-b_scale, b_scale, spec.m - 2) * d
    s = rng.uniform(s_lo, s_hi, spec.m - 1) * d
    return BSFunctions.spline(spec, b, s, d, alpha, nu)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record (and print) one verdict line for an acceptance criterion."""

    def emit(number, passed, detail, verdict=None):
        word = verdict or ("PASS" if passed else "FAIL")
        line = f"criterion {number}: {word} | {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
