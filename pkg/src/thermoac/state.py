"""System snapshots and trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, ScalarField
from .model import ModelParams
from .temperature import pointwise_margin

__all__ = ["SystemState", "Trajectory"]


@dataclass
class SystemState:
    """One time level of the coupled system."""

    rho: ScalarField
    xi: ScalarField
    theta: ScalarField

    def __post_init__(self):
        g = self.rho.grid
        if self.xi.grid != g or self.theta.grid != g:
            raise ValueError("SystemState: fields must share one grid")

    @property
    def grid(self) -> Grid:
        return self.rho.grid

    def mu(self) -> ScalarField:
        """Chemical-potential source sqrt(xi/rho)."""
        r = self.rho.values
        if np.any(r <= 0.0):
            raise ValueError("SystemState.mu: rho must be strictly positive")
        return ScalarField(self.grid, np.sqrt(np.maximum(self.xi.values, 0.0) / r))

    def margin(self, params: ModelParams) -> ScalarField:
        return ScalarField(self.grid, pointwise_margin(self.rho.values, self.xi.values, params))


@dataclass
class Trajectory:
    """Uniformly sampled run history: arrays of shape (nlev, *grid.shape)."""

    grid: Grid
    times: np.ndarray
    rho: np.ndarray
    xi: np.ndarray
    theta: np.ndarray
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        nlev = self.times.shape[0]
        for name in ("rho", "xi", "theta"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (nlev,) + self.grid.shape:
                raise ValueError(f"Trajectory: {name} has shape {arr.shape}, expected {(nlev,) + self.grid.shape}")
            setattr(self, name, arr)

    def __len__(self) -> int:
        return int(self.times.shape[0])

    def state(self, k: int) -> SystemState:
        return SystemState(
            rho=ScalarField(self.grid, self.rho[k]),
            xi=ScalarField(self.grid, self.xi[k]),
            theta=ScalarField(self.grid, self.theta[k]),
        )

    @property
    def final(self) -> SystemState:
        return self.state(len(self) - 1)
