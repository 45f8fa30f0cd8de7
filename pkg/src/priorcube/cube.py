"""Least-squares fit of 2x2 factorial data and the three confidence cubes
(standard, naive pretest, and J(b, s)) for the four cell means."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CriticalConstants
from .model import EXTERNAL, INTERNAL, ConfigurationError, ModelConfig
from .tuning import BSFunctions

# cell order (x1, x2) matching theta = (theta00, theta10, theta01, theta11)
CELLS = ((-1, -1), (1, -1), (-1, 1), (1, 1))
# sign of the b-shift applied to each cell-mean interval
SHIFT_SIGNS = np.array([-1.0, 1.0, 1.0, -1.0])

STANDARD_CUBE = "standard"
NAIVE_CUBE = "naive"
NEW_CUBE = "new"


class DataError(ValueError):
    pass


@dataclass
class FactorialDataset:
    responses: dict[tuple[int, int], list[float]]
    external_sigma_hat: float | None = None

    def __post_init__(self):
        missing = [c for c in CELLS if c not in self.responses]
        if missing or len(self.responses) != 4:
            raise DataError(f"need exactly the four cells {CELLS}, missing {missing}")
        counts = {cell: len(self.responses[cell]) for cell in CELLS}
        if len(set(counts.values())) != 1 or counts[CELLS[0]] == 0:
            listing = ", ".join(f"{cell}: {n}" for cell, n in counts.items())
            raise DataError(f"unbalanced cells ({listing})")
        if self.external_sigma_hat is not None and not self.external_sigma_hat >= 0:
            raise DataError("external sigma estimate must be nonnegative")

    @property
    def c(self) -> int:
        return len(self.responses[CELLS[0]])

    def cell_means(self) -> np.ndarray:
        return np.array([np.mean(self.responses[cell]) for cell in CELLS])

    @classmethod
    def from_cell_values(cls, values, external_sigma_hat=None) -> "FactorialDataset":
        """Dataset with one list of observations per cell, in theta order."""
        return cls({cell: list(map(float, np.atleast_1d(v))) for cell, v in zip(CELLS, values)},
                   external_sigma_hat)

    @classmethod
    def read_csv(cls, path, external_sigma_hat=None) -> "FactorialDataset":
        responses: dict[tuple[int, int], list[float]] = {cell: [] for cell in CELLS}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["x1", "x2", "y"]:
                raise DataError(f"{path}: header must be x1,x2,y")
            for lineno, row in enumerate(reader, start=2):
                try:
                    cell = (int(float(row["x1"])), int(float(row["x2"])))
                    y = float(row["y"])
                except (TypeError, ValueError):
                    raise DataError(f"{path}:{lineno}: cannot parse row {row!r}") from None
                if cell not in responses:
                    raise DataError(f"{path}:{lineno}: x1 and x2 must be -1 or 1")
                responses[cell].append(y)
        return cls(responses, external_sigma_hat)


@dataclass(frozen=True)
class Estimates:
    beta_hat: np.ndarray
    theta_hat: np.ndarray
    sigma_hat: float
    sigma_tilde: float
    t_stat: float


@dataclass(frozen=True)
class CubeResult:
    kind: str
    intervals: tuple[tuple[float, float], ...]
    volume: float
    volume_ratio_vs_standard: float
    accepted: bool | None = field(default=None, compare=False)

    @property
    def half_width(self) -> float:
        return self.intervals[0][1]

    @property
    def centers(self) -> np.ndarray:
        return np.array([c for c, _ in self.intervals])

    @property
    def sqrt_volume_ratio(self) -> float:
        return math.sqrt(self.volume_ratio_vs_standard)


def fit(data: FactorialDataset, config: ModelConfig) -> Estimates:
    if data.c != config.c:
        raise ConfigurationError(f"c: dataset has {data.c} replicates, config says {config.c}")
    means = data.cell_means()
    m00, m10, m01, m11 = means
    beta = np.array([
        (m00 + m10 + m01 + m11) / 4.0,
        (-m00 + m10 - m01 + m11) / 4.0,
        (-m00 - m10 + m01 + m11) / 4.0,
        (m00 - m10 - m01 + m11) / 4.0,
    ])
    b12 = beta[3]
    # the saturated fit reproduces the cell means
    theta = means.copy()

    if config.sigma_mode == INTERNAL:
        if data.external_sigma_hat is not None:
            raise ConfigurationError("sigma: external estimate supplied in internal mode")
        rss = sum(float(np.sum((np.asarray(data.responses[cell]) - mu) ** 2))
                  for cell, mu in zip(CELLS, means))
        sigma_hat = math.sqrt(rss / config.nu)
    else:
        if data.external_sigma_hat is None:
            raise ConfigurationError("sigma: external mode needs an external sigma estimate")
        sigma_hat = float(data.external_sigma_hat)

    nu = config.nu
    if nu == math.inf:
        sigma_tilde = sigma_hat
    else:
        sigma_tilde = math.sqrt((nu * sigma_hat ** 2 + b12 ** 2 / config.v55) / (nu + 1.0))
    return Estimates(beta, theta, sigma_hat, sigma_tilde, _t_stat(b12, sigma_hat, config))


def _t_stat(b12: float, sigma_hat: float, config: ModelConfig) -> float:
    denom = sigma_hat * math.sqrt(config.v55)
    if denom == 0.0:
        return 0.0 if b12 == 0.0 else math.copysign(math.inf, b12)
    return b12 / denom


def _cube(kind: str, centers, half_width: float, d: float, unit: float, accepted=None) -> CubeResult:
    intervals = tuple((float(c), float(half_width)) for c in centers)
    volume = (2.0 * half_width) ** 4
    std_half = d * unit
    ratio = (half_width / std_half) ** 4 if std_half > 0 else 1.0
    return CubeResult(kind, intervals, volume, ratio, accepted)


def standard_cube(est: Estimates, constants: CriticalConstants, config: ModelConfig) -> CubeResult:
    unit = math.sqrt(config.v11) * est.sigma_hat
    return _cube(STANDARD_CUBE, est.theta_hat, unit * constants.d, constants.d, unit)


def general_cube(est: Estimates, fns: BSFunctions, config: ModelConfig, kind: str = NEW_CUBE) -> CubeResult:
    """Cube of the form theta_hat -+ unit * b(t)  +-  unit * s(|t|), unit = sqrt(v11) sigma_hat."""
    unit = math.sqrt(config.v11) * est.sigma_hat
    t = est.t_stat
    centers = est.theta_hat + SHIFT_SIGNS * (unit * fns.b(t))
    accepted = None if fns.cutoff is None else abs(t) <= fns.cutoff
    return _cube(kind, centers, unit * fns.s(abs(t)), fns.d, unit, accepted)


def naive_cube(est: Estimates, constants: CriticalConstants, config: ModelConfig) -> CubeResult:
    return general_cube(est, BSFunctions.naive(constants), config, kind=NAIVE_CUBE)


def naive_cube_explicit(est: Estimates, constants: CriticalConstants, config: ModelConfig) -> CubeResult:
    """Pretest cube written as its two branches, without the (b, s) form."""
    unit = math.sqrt(config.v11) * est.sigma_hat
    if abs(est.t_stat) > constants.q:
        return _cube(NAIVE_CUBE, est.theta_hat, unit * constants.d, constants.d, unit, False)
    b12 = est.beta_hat[3]
    half = (math.sqrt(3.0 / config.c) / 2.0) * constants.d_tilde * est.sigma_tilde
    return _cube(NAIVE_CUBE, est.theta_hat + SHIFT_SIGNS * b12, half, constants.d, unit, True)


__all__ = [
    "CELLS", "CubeResult", "DataError", "Estimates", "FactorialDataset", "EXTERNAL", "INTERNAL",
    "fit", "general_cube", "naive_cube", "naive_cube_explicit", "standard_cube",
]
