"""Problem parameters shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the dispersive model with memory damping.

    sigma    : order of the fractional Laplacian, >= 1
    n        : space dimension, >= 1
    m        : integrability index of the data space, in [1, 2)
    p        : power of the nonlinearity, > 1
    eps_zone : upper edge of the small-frequency zone (epsilon)
    n_zone   : lower edge of the large-frequency zone (N)
    """

    sigma: float = 1.0
    n: int = 1
    m: float = 1.0
    p: float = 2.0
    eps_zone: float = 0.1
    n_zone: float = 10.0

    def __post_init__(self):
        if not self.sigma >= 1.0:
            raise ValueError(f"sigma must be >= 1, got {self.sigma}")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not (1.0 <= self.m < 2.0):
            raise ValueError(f"m must lie in [1, 2), got {self.m}")
        if not self.p > 1.0:
            raise ValueError(f"p must be > 1, got {self.p}")
        if not (0.0 < self.eps_zone < self.n_zone):
            raise ValueError(
                f"zone thresholds must satisfy 0 < eps_zone < n_zone, "
                f"got eps_zone={self.eps_zone}, n_zone={self.n_zone}"
            )

    def with_(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)
