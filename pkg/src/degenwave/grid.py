"""Uniform spatial grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform 1-D grid with n nodes on [x_min, x_max], including endpoints."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"grid needs at least 16 nodes (got n={self.n})")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    def covers(self, support_radius: float, speed: float, t_end: float) -> bool:
        """True if waves from |x| <= support_radius stay inside for t <= t_end."""
        return (self.x_max - self.x_min) >= 2.0 * support_radius + 2.0 * speed * t_end
