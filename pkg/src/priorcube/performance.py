"""Coverage probability, scaled expected volume and the weighted criterion of a
cube family J(b, s), all as deterministic quadratures."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import ModelConfig
from .stats import SQRT_2PI, ScaledChi, moment_w4, normal_cdf, w_rule
from .tuning import NAIVE, SPLINE, STANDARD, BSFunctions, TuningSpec


@dataclass(frozen=True)
class QuadratureSettings:
    n_w: int = 40
    n_x: int = 16
    n_t: int = 24
    naive_panels: int = 6


DEFAULT_SETTINGS = QuadratureSettings()


@dataclass(frozen=True)
class PerformancePoint:
    gamma: float
    coverage: float
    sev: float

    @property
    def sqrt_sev(self) -> float:
        return math.sqrt(self.sev)


@dataclass
class PerformanceCurve:
    points: list[PerformancePoint]
    fns: BSFunctions | None = None
    config: ModelConfig | None = None

    @property
    def gammas(self) -> np.ndarray:
        return np.array([p.gamma for p in self.points])

    @property
    def coverages(self) -> np.ndarray:
        return np.array([p.coverage for p in self.points])

    @property
    def sqrt_sevs(self) -> np.ndarray:
        return np.array([p.sqrt_sev for p in self.points])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["gamma", "coverage", "sqrt_sev"])
            for p in self.points:
                writer.writerow([repr(p.gamma), repr(p.coverage), repr(p.sqrt_sev)])

    @classmethod
    def from_csv(cls, path) -> "PerformanceCurve":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["gamma", "coverage", "sqrt_sev"]:
                raise ValueError(f"{path}: expected header gamma,coverage,sqrt_sev")
            pts = [
                PerformancePoint(float(r["gamma"]), float(r["coverage"]), float(r["sqrt_sev"]) ** 2)
                for r in reader
            ]
        return cls(pts)


def x_breakpoints(fns: BSFunctions, naive_panels: int = 6) -> np.ndarray:
    """Panel edges over [-cutoff, cutoff] on which b and s are smooth."""
    if fns.kind == SPLINE:
        k = np.asarray(fns.spec.knots)
        return np.concatenate([-k[:0:-1], k])
    if fns.kind == NAIVE:
        return fns.q * np.linspace(-1.0, 1.0, 2 * naive_panels + 1)
    # STANDARD: the integrand vanishes identically; any panel layout will do
    return np.array([-1.0, 0.0, 1.0])


def x_rule(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (half * x + 0.5 * (a + b)).ravel(), (half * w).ravel()


def _t_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _check_match(fns: BSFunctions, config: ModelConfig) -> None:
    if not math.isclose(fns.alpha, config.alpha, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"functions built for alpha={fns.alpha}, config has alpha={config.alpha}")
    if fns.nu != config.nu:
        raise ValueError(f"functions built for nu={fns.nu}, config has nu={config.nu}")


class Evaluator:
    """Quadrature evaluator for a fixed x-panel layout and sigma law.

    The x-nodes depend only on the panel edges, so the optimizer builds one
    evaluator per knot layout and feeds it many (b, s) candidates through
    :meth:`coverage_at_values` / :meth:`volume_at_values`.
    """

    def __init__(self, edges, d: float, alpha: float, nu: float,
                 settings: QuadratureSettings = DEFAULT_SETTINGS):
        self.settings = settings
        self.d = float(d)
        self.alpha = float(alpha)
        self.dist = ScaledChi(nu)
        self.ew4 = moment_w4(self.dist)
        self.ws, self.wwts = (np.array(a) for a in w_rule(self.dist, settings.n_w))
        self.xs, self.xwts = x_rule(np.asarray(edges, dtype=float), settings.n_x)
        self.tn, self.tw = _t_rule(settings.n_t)
        self.edges = np.asarray(edges, dtype=float)

    @classmethod
    def for_functions(cls, fns: BSFunctions, settings: QuadratureSettings = DEFAULT_SETTINGS):
        return cls(x_breakpoints(fns, settings.naive_panels), fns.d, fns.alpha, fns.nu, settings)

    def node_values(self, fns: BSFunctions) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(fns.b(self.xs), dtype=float), np.asarray(fns.s(np.abs(self.xs)), dtype=float)

    def coverage_at_values(self, gammas, bx, sx) -> np.ndarray:
        gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
        excess = kernels.coverage_excess(
            gammas, self.ws, self.wwts, self.xs, self.xwts, bx, sx, self.d, self.tn, self.tw
        )
        return (1.0 - self.alpha) + excess

    def volume_at_values(self, gammas, sx) -> np.ndarray:
        gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
        s4 = sx ** 4 - self.d ** 4
        excess = kernels.volume_excess(gammas, self.ws, self.wwts, self.xs, self.xwts, s4)
        return 1.0 + excess / (self.d ** 4 * self.ew4)

    def criterion_at_values(self, sx, lam: float) -> float:
        """Weighted average of e - 1 under lam * Lebesgue + point mass at 0."""
        pos = self.xs > 0
        x = self.xs[pos]
        s4 = sx[pos] ** 4 - self.d ** 4
        weight = lam + np.exp(-0.5 * (self.ws[:, None] * x[None, :]) ** 2) / SQRT_2PI
        inner = weight @ (self.xwts[pos] * s4)
        return float(2.0 * np.dot(self.wwts * self.ws ** 5, inner) / (self.d ** 4 * self.ew4))

    def coverage(self, gammas, fns: BSFunctions) -> np.ndarray:
        return self.coverage_at_values(gammas, *self.node_values(fns))

    def volume(self, gammas, fns: BSFunctions) -> np.ndarray:
        return self.volume_at_values(gammas, self.node_values(fns)[1])


def k_factor(t3: float, h: float, w: float, gamma: float, fns: BSFunctions) -> float:
    """Conditional probability of the cube event given T3, H, W (literal form)."""
    lo, up = fns.lower_upper(h, w)
    l1 = 2 * lo + t3 - h + gamma
    u1 = 2 * up + t3 - h + gamma
    l2 = -2 * up + t3 + h - gamma
    u2 = -2 * lo + t3 + h - gamma
    lt1, ut1 = max(l1, -u1), min(u1, -l1)
    lt2, ut2 = max(l2, -u2), min(u2, -l2)
    if lt1 > ut1 or lt2 > ut2:
        return 0.0
    r2 = math.sqrt(2.0)
    return float(
        (normal_cdf(ut1 / r2) - normal_cdf(lt1 / r2)) * (normal_cdf(ut2 / r2) - normal_cdf(lt2 / r2))
    )


def _evaluator(fns: BSFunctions, config: ModelConfig | None, settings: QuadratureSettings) -> Evaluator:
    if config is not None:
        _check_match(fns, config)
    return Evaluator.for_functions(fns, settings)


def coverage(gamma, fns: BSFunctions, config: ModelConfig | None = None,
             settings: QuadratureSettings = DEFAULT_SETTINGS):
    """Coverage probability c(gamma; b, s); accepts a scalar or an array of gammas."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma must be nonnegative (coverage is even in gamma)")
    out = _evaluator(fns, config, settings).coverage(g.ravel(), fns)
    return float(out[0]) if g.ndim == 0 else out.reshape(g.shape)


def scaled_expected_volume(gamma, fns: BSFunctions, config: ModelConfig | None = None,
                           settings: QuadratureSettings = DEFAULT_SETTINGS):
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma must be nonnegative (e is even in gamma)")
    out = _evaluator(fns, config, settings).volume(g.ravel(), fns)
    return float(out[0]) if g.ndim == 0 else out.reshape(g.shape)


def criterion(fns: BSFunctions, spec: TuningSpec | None = None, config: ModelConfig | None = None,
              settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    if fns.kind == STANDARD:
        return 0.0
    if fns.kind != SPLINE:
        raise ValueError("criterion is defined for spline or standard functions")
    spec = spec or fns.spec
    ev = _evaluator(fns, config, settings)
    return ev.criterion_at_values(ev.node_values(fns)[1], spec.lam)


def performance_curve(fns: BSFunctions, config: ModelConfig | None = None, gamma_max: float = 12.0,
                      step: float = 0.1, settings: QuadratureSettings = DEFAULT_SETTINGS) -> PerformanceCurve:
    if not gamma_max > 0 or not step > 0:
        raise ValueError("gamma_max and step must be positive")
    n = int(math.floor(gamma_max / step + 1e-9))
    gammas = step * np.arange(n + 1)
    ev = _evaluator(fns, config, settings)
    bx, sx = ev.node_values(fns)
    cov = ev.coverage_at_values(gammas, bx, sx)
    sev = ev.volume_at_values(gammas, sx)
    pts = [PerformancePoint(float(g), float(c), float(e)) for g, c, e in zip(gammas, cov, sev)]
    return PerformanceCurve(pts, fns, config)
