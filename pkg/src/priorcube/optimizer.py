"""Constrained search for the spline values of b and s.

Minimises the weighted expected-volume criterion subject to the coverage
constraint ``c(gamma) >= 1 - alpha`` on a grid of gamma values, starting from
the standard cube (b = 0, s = d), which is feasible with criterion 0.
"""
from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np
from scipy import optimize as sopt

from .constants import CriticalConstants
from .model import ModelConfig
from .performance import DEFAULT_SETTINGS, Evaluator, QuadratureSettings, x_breakpoints
from .tuning import BSFunctions, TuningSpec

log = logging.getLogger(__name__)

FEASIBILITY_SLACK = 5e-4
_SEARCH_SLACK = 1e-6
_TIE = 1e-8


@dataclass
class OptimizationProblem:
    spec: TuningSpec
    config: ModelConfig
    constants: CriticalConstants
    constraint_grid: np.ndarray | None = None
    budget: int = 5000
    seed: int = 0
    grid_step: float = 0.25
    grid_margin: float = 3.0

    def __post_init__(self):
        if self.budget < 100:
            raise ValueError(f"budget: must be at least 100, got {self.budget}")
        if self.grid_margin < 3:
            raise ValueError(f"grid_margin: must be at least 3, got {self.grid_margin}")
        if not self.grid_step > 0:
            raise ValueError("grid_step: must be positive")
        if not math.isclose(self.constants.alpha, self.config.alpha) or self.constants.nu != self.config.nu:
            raise ValueError("constants: alpha/nu disagree with the model config")
        top = self.spec.r + self.grid_margin
        if self.constraint_grid is None:
            n = int(math.floor(top / self.grid_step + 1e-9))
            grid = self.grid_step * np.arange(n + 1)
            if grid[-1] < top - 1e-12:
                grid = np.append(grid, top)
        else:
            grid = np.unique(np.asarray(self.constraint_grid, dtype=float))
            if grid[0] != 0.0 or grid[-1] < top - 1e-12 or np.any(grid < 0):
                raise ValueError("constraint_grid: must span [0, r + margin]")
        self.constraint_grid = grid


@dataclass
class OptimizationResult:
    fns: BSFunctions
    criterion_value: float
    min_coverage: float
    worst_gamma: float
    evaluations_used: int
    converged: bool
    history: list[tuple[int, float, float, float]] = field(default_factory=list)


def min_coverage_search(fns: BSFunctions, config: ModelConfig | None, grid,
                        evaluator: Evaluator | None = None, xtol: float = 1e-3) -> tuple[float, float]:
    """Minimise c(gamma) over gamma >= 0: grid scan, then a bounded 1-D refinement."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    ev = evaluator or Evaluator.for_functions(fns)
    bx, sx = ev.node_values(fns)
    return _refine_min(lambda g: ev.coverage_at_values(g, bx, sx), grid, xtol)


def _refine_min(cov_fn, grid: np.ndarray, xtol: float) -> tuple[float, float]:
    covs = cov_fn(grid)
    i = int(np.argmin(covs))
    g_best, c_best = float(grid[i]), float(covs[i])
    if grid.size == 1:
        return g_best, c_best
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, grid.size - 1)])
    res = sopt.minimize_scalar(
        lambda g: float(cov_fn(np.array([g]))[0]), bounds=(lo, hi), method="bounded",
        options={"xatol": xtol},
    )
    if res.fun < c_best:
        return float(res.x), float(res.fun)
    return g_best, c_best


class _Search:
    """Memoised criterion/constraint evaluation with best-feasible bookkeeping."""

    def __init__(self, problem: OptimizationProblem, evaluator: Evaluator, grid: np.ndarray,
                 stream: TextIO | None, log_every: int):
        self.problem = problem
        self.ev = evaluator
        self.grid = grid
        self.spec = problem.spec
        self.d = problem.constants.d
        self.target = 1.0 - problem.config.alpha
        self.cache: dict[bytes, tuple[float, np.ndarray]] = {}
        self.evaluations = 0
        self.best: tuple[float, float, np.ndarray] | None = None  # crit, margin, params
        self.history: list[tuple[int, float, float, float]] = []
        self.stream = stream
        self.log_every = log_every

    def fns(self, p: np.ndarray) -> BSFunctions:
        m = self.spec.m
        cfg = self.problem.config
        return BSFunctions.spline(self.spec, p[: m - 2], p[m - 2:], self.d, cfg.alpha, cfg.nu)

    def evaluate(self, p: np.ndarray) -> tuple[float, np.ndarray]:
        key = np.asarray(p, dtype=float).tobytes()
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        bx, sx = self.ev.node_values(self.fns(p))
        crit = self.ev.criterion_at_values(sx, self.spec.lam)
        covs = self.ev.coverage_at_values(self.grid, bx, sx)
        self.cache[key] = (crit, covs)
        self.evaluations += 1
        self._record(np.array(p, dtype=float), crit, covs)
        return crit, covs

    def _record(self, p, crit, covs):
        margin = float(covs.min()) - self.target
        if margin >= -_SEARCH_SLACK:
            if self.best is None or crit < self.best[0] - _TIE or (
                abs(crit - self.best[0]) <= _TIE and margin > self.best[1]
            ):
                self.best = (crit, margin, p)
        i = int(np.argmin(covs))
        best_crit = self.best[0] if self.best else math.nan
        self.history.append((self.evaluations, best_crit, float(covs[i]), float(self.grid[i])))
        if self.stream is not None and self.evaluations % self.log_every == 0:
            print(f"{self.evaluations},{crit:.10g},{covs[i]:.8f},{self.grid[i]:g}", file=self.stream, flush=True)

    def objective(self, p):
        return self.evaluate(p)[0]

    def constraints(self, p):
        # scaled so that coverage shortfalls of 1e-4 register with COBYLA
        return 100.0 * (self.evaluate(p)[1] - self.target)


def optimize(problem: OptimizationProblem, stream: TextIO | None = sys.stderr, log_every: int = 25,
             settings: QuadratureSettings = DEFAULT_SETTINGS, max_rounds: int = 3) -> OptimizationResult:
    spec, cfg, cc = problem.spec, problem.config, problem.constants
    d = cc.d
    m = spec.m
    start = BSFunctions.flat_spline(spec, d, cfg.alpha, cfg.nu)
    ev = Evaluator(x_breakpoints(start), d, cfg.alpha, cfg.nu, settings)

    p0 = np.concatenate([np.zeros(m - 2), np.full(m - 1, d)])
    bounds = [(-d, d)] * (m - 2) + [(0.05 * d, 1.5 * d)] * (m - 1)
    grid = np.array(problem.constraint_grid, dtype=float)
    used = 0
    history: list[tuple[int, float, float, float]] = []
    terminated_normally = False
    gamma_star, cov_star = 0.0, 1.0 - cfg.alpha
    best = None

    if stream is not None:
        print("iter,criterion,min_coverage,worst_gamma", file=stream, flush=True)

    for _ in range(max_rounds):
        search = _Search(problem, ev, grid, stream, log_every)
        search.evaluations = used
        x_start = p0 if best is None else best[2]
        search.evaluate(x_start)
        remaining = problem.budget - search.evaluations
        if remaining <= 0:
            break
        res = sopt.minimize(
            search.objective,
            x_start,
            method="COBYLA",
            constraints=[{"type": "ineq", "fun": search.constraints}],
            bounds=bounds,
            options={"rhobeg": 0.3, "tol": 1e-6, "maxiter": remaining},
        )
        used = search.evaluations
        history.extend(search.history)
        terminated_normally = bool(res.success)
        best = search.best
        if best is None:
            break
        gamma_star, cov_star = _refine_min(
            lambda g: ev.coverage_at_values(g, *ev.node_values(search.fns(best[2]))), grid, 1e-3
        )
        if cov_star >= 1.0 - cfg.alpha - FEASIBILITY_SLACK:
            break
        log.info("coverage %.6f at gamma=%.4f between grid points; refining grid", cov_star, gamma_star)
        grid = np.unique(np.append(grid, gamma_star))
        terminated_normally = False

    improved = best is not None and best[0] < -_TIE
    feasible = cov_star >= 1.0 - cfg.alpha - FEASIBILITY_SLACK
    if improved and feasible:
        p = best[2]
        fns = BSFunctions.spline(spec, p[: m - 2], p[m - 2:], d, cfg.alpha, cfg.nu)
        crit = best[0]
    else:
        fns = start
        crit = 0.0
        gamma_star, cov_star = 0.0, 1.0 - cfg.alpha
    converged = bool(improved and feasible and terminated_normally)
    fns.meta.update(
        converged=converged, seed=problem.seed, budget=problem.budget, evaluations=used,
        criterion=crit, min_coverage=cov_star, worst_gamma=gamma_star,
    )
    return OptimizationResult(fns, crit, cov_star, gamma_star, used, converged, history)
