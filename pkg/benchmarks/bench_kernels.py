"""Time the numba and pure-numpy quadrature kernels on a realistic workload.

One "sweep" is what the optimizer pays per candidate: coverage on the 45-point
constraint grid of a c = 2, r = 8 problem, plus the volume kernel.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from priorcube import kernels
from priorcube._backend import HAS_NUMBA
from priorcube.constants import critical_constants
from priorcube.model import ModelConfig
from priorcube.performance import Evaluator
from priorcube.tuning import BSFunctions, TuningSpec


def workload():
    cfg = ModelConfig.internal(2)
    cc = critical_constants(cfg.alpha, cfg.dist)
    spec = TuningSpec.evenly_spaced(8.0, 0.08)
    rng = np.random.default_rng(0)
    fns = BSFunctions.spline(spec, rng.uniform(-0.5, 0.5, 5), rng.uniform(0.8, 1.1, 6) * cc.d, cc.d, 0.05, 4)
    ev = Evaluator.for_functions(fns)
    bx, sx = ev.node_values(fns)
    gammas = 0.25 * np.arange(45)
    cov_args = (gammas, ev.ws, ev.wwts, ev.xs, ev.xwts, bx, sx, ev.d, ev.tn, ev.tw)
    vol_args = (gammas, ev.ws, ev.wwts, ev.xs, ev.xwts, sx**4 - ev.d**4)
    return cov_args, vol_args


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    cov_args, vol_args = workload()
    if not HAS_NUMBA:
        print("numba not installed; only the numpy kernels are timed")
    else:
        # compile (or load from cache) before timing
        kernels.coverage_excess_nb(*cov_args)
        kernels.volume_excess_nb(*vol_args)

    rows = []
    for label, nb, np_ in (
        ("coverage sweep (45 gammas)", kernels.coverage_excess_nb, kernels.coverage_excess_np),
        ("volume sweep (45 gammas)", kernels.volume_excess_nb, kernels.volume_excess_np),
    ):
        a = cov_args if "coverage" in label else vol_args
        t_np, out_np = best_of(np_, a, args.repeat)
        if HAS_NUMBA:
            t_nb, out_nb = best_of(nb, a, args.repeat)
            diff = float(np.max(np.abs(out_nb - out_np)))
            rows.append((label, t_nb, t_np, t_np / t_nb, diff))
        else:
            rows.append((label, float("nan"), t_np, float("nan"), float("nan")))

    print(f"{'kernel':<30}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max |diff|':>13}")
    for label, t_nb, t_np, ratio, diff in rows:
        print(f"{label:<30}{t_nb:>12.4f}{t_np:>12.4f}{ratio:>10.1f}{diff:>13.1e}")


if __name__ == "__main__":
    main()
