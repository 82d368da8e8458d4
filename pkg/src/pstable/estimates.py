"""Monte Carlo estimate container and streaming moment accumulation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error and sample count."""

    mean: float
    se: float
    count: int

    def scaled(self, factor: float) -> "MCEstimate":
        return MCEstimate(self.mean * factor, self.se * abs(factor), self.count)

    def __add__(self, other: "MCEstimate") -> "MCEstimate":
        """Sum of two estimates of independent quantities."""
        return MCEstimate(
            self.mean + other.mean,
            math.hypot(self.se, other.se),
            min(self.count, other.count),
        )


def combined_se(*estimates: MCEstimate) -> float:
    return math.hypot(*(e.se for e in estimates))


class RunningMoments:
    """Streaming sum and sum of squares; no sample storage."""

    def __init__(self):
        self.count = 0
        self._sum = 0.0
        self._sumsq = 0.0

    def add(self, values: np.ndarray) -> None:
        v = np.asarray(values, dtype=np.float64)
        self.count += v.size
        self._sum += float(v.sum())
        self._sumsq += float((v * v).sum())

    def estimate(self, scale: float = 1.0) -> MCEstimate:
        if self.count == 0:
            raise ValueError("no samples accumulated")
        mean = self._sum / self.count
        if self.count < 2:
            return MCEstimate(mean * scale, 0.0, self.count)
        var = max(self._sumsq / self.count - mean * mean, 0.0)
        var *= self.count / (self.count - 1)
        se = math.sqrt(var / self.count)
        return MCEstimate(mean * scale, se * abs(scale), self.count)
