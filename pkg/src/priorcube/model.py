"""Design configuration of the 2x2 factorial experiment."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .stats import ScaledChi

INTERNAL = "internal"
EXTERNAL = "external"


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    """Replicates ``c``, level ``alpha`` and the source of the sigma estimate.

    In ``internal`` mode sigma is estimated from the residuals of the full
    model with ``4c - 4`` degrees of freedom.  In ``external`` mode an
    independent estimate with ``external_df`` degrees of freedom (possibly
    ``inf``) is supplied.
    """

    c: int
    alpha: float = 0.05
    sigma_mode: str = INTERNAL
    external_df: float | None = None

    def __post_init__(self):
        if not (isinstance(self.c, int) and self.c >= 1):
            raise ConfigurationError(f"c: replicates must be a positive integer, got {self.c!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha: must lie in (0, 1), got {self.alpha!r}")
        if self.sigma_mode == INTERNAL:
            if self.c < 2:
                raise ConfigurationError(
                    "c: internal sigma estimation needs at least 2 replicates (no residual df)"
                )
            if self.external_df is not None:
                raise ConfigurationError("external_df: only meaningful in external sigma mode")
        elif self.sigma_mode == EXTERNAL:
            df = self.external_df
            if df is None or not (df == math.inf or (float(df).is_integer() and df >= 1)):
                raise ConfigurationError(f"external_df: positive integer or inf required, got {df!r}")
        else:
            raise ConfigurationError(f"sigma_mode: unknown mode {self.sigma_mode!r}")

    @classmethod
    def internal(cls, c: int, alpha: float = 0.05) -> "ModelConfig":
        return cls(c=c, alpha=alpha)

    @classmethod
    def external(cls, df: float, c: int = 1, alpha: float = 0.05) -> "ModelConfig":
        return cls(c=c, alpha=alpha, sigma_mode=EXTERNAL, external_df=df)

    @property
    def nu(self) -> float:
        if self.sigma_mode == INTERNAL:
            return 4 * self.c - 4
        return self.external_df

    @property
    def dist(self) -> ScaledChi:
        return ScaledChi(self.nu)

    @property
    def dist_reduced(self) -> ScaledChi:
        return self.dist.plus_one()

    @property
    def v11(self) -> float:
        """Variance factor of each cell-mean estimator (v11 = v22 = v33 = v44)."""
        return 1.0 / self.c

    @property
    def v55(self) -> float:
        """Variance factor of the interaction estimator."""
        return 1.0 / (4.0 * self.c)
