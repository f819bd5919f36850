"""Uniform tensor grids on the unit interval / unit square, and discrete calculus.

Nodes include both endpoints (spacing h = 1/(n-1)). The Laplacian uses
mirror ghosts for the zero-flux boundary, which pairs with trapezoid cell
weights so that the weighted sum of laplacian_neumann(u) telescopes to zero
exactly (discrete conservation) and the operator is the exact gradient of the
edge-based Dirichlet energy with respect to the weighted inner product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "field_from_function",
    "constant_field",
    "laplacian_values",
    "laplacian_neumann",
    "norms",
    "time_derivative",
]


@dataclass(frozen=True)
class Grid:
    """dim in {1, 2}, n nodes per axis on [0, 1]."""

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("Grid: dim must be 1 or 2")
        if self.n < 3:
            raise ValueError("Grid: need at least 3 nodes per axis")

    @property
    def h(self) -> float:
        return 1.0 / (self.n - 1)

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def npoints(self) -> int:
        return self.n**self.dim

    def axis(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    def coords(self):
        """Node coordinates: (x,) in 1D, (X, Y) with ij indexing in 2D."""
        x = self.axis()
        if self.dim == 1:
            return (x,)
        return np.meshgrid(x, x, indexing="ij")

    def cell_weights(self) -> np.ndarray:
        """Trapezoid quadrature weights per node (shape == grid.shape)."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        if self.dim == 1:
            return w
        return np.outer(w, w)


@dataclass
class ScalarField:
    """A float64 array of node values bound to its grid. Values must be finite."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"ScalarField: values shape {self.values.shape} != grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("ScalarField: values must be finite")


def field_from_function(grid: Grid, fn) -> ScalarField:
    return ScalarField(grid, fn(*grid.coords()))


def constant_field(grid: Grid, value: float) -> ScalarField:
    return ScalarField(grid, np.full(grid.shape, float(value)))


def laplacian_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Five(three)-point Laplacian with mirror ghosts, on a raw array."""
    h2 = grid.h * grid.h
    p = np.pad(values, 1, mode="reflect")
    if grid.dim == 1:
        return (p[:-2] + p[2:] - 2.0 * values) / h2
    return (
        p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * values
    ) / h2


def laplacian_neumann(u: ScalarField) -> ScalarField:
    return ScalarField(u.grid, laplacian_values(u.values, u.grid))


def norms(u: ScalarField) -> tuple[float, float, float]:
    """(L2, Linf, L1) with trapezoid cell weights; the measure of the domain is 1."""
    w = u.grid.cell_weights()
    v = u.values
    l2 = float(np.sqrt(np.sum(w * v * v)))
    linf = float(np.max(np.abs(v)))
    l1 = float(np.sum(w * np.abs(v)))
    return l2, linf, l1


def time_derivative(series: np.ndarray, dt: float) -> np.ndarray:
    """Central differences along axis 0, second-order one-sided at the ends.

    For a two-level series this degenerates to the plain forward/backward
    difference at both ends.
    """
    series = np.asarray(series, dtype=float)
    nlev = series.shape[0]
    if nlev < 2:
        raise ValueError("time_derivative: need at least two time levels")
    out = np.empty_like(series)
    if nlev == 2:
        out[0] = out[1] = (series[1] - series[0]) / dt
        return out
    out[1:-1] = (series[2:] - series[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt)
    out[-1] = (3.0 * series[-1] - 4.0 * series[-2] + series[-3]) / (2.0 * dt)
    return out
