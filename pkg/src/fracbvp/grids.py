"""Uniform grids on an interval and nodal grid functions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform mesh of [a, b] with M intervals; nodes ``x_j = a + j*h``."""

    a: float
    b: float
    M: int

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"grid needs at least 2 intervals, got M={self.M}")
        if not self.b > self.a:
            raise ValueError(f"empty interval [{self.a}, {self.b}]")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.M

    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.M + 1)

    def interior_nodes(self) -> np.ndarray:
        return self.nodes()[1:-1]

    def refined(self) -> "Grid":
        return Grid(self.a, self.b, 2 * self.M)

    def coarsened(self) -> "Grid":
        if self.M % 2:
            raise ValueError("cannot coarsen a grid with an odd interval count")
        return Grid(self.a, self.b, self.M // 2)


@dataclass
class GridFunction:
    """Nodal values on a grid, boundary nodes included (M + 1 entries)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.M + 1,):
            raise ValueError(
                f"expected {self.grid.M + 1} nodal values, got {self.values.shape}")

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.M + 1))

    @classmethod
    def sample(cls, grid: Grid, f) -> "GridFunction":
        """Sample a callable (or PowerSum) at all nodes."""
        return cls(grid, np.asarray(f(grid.nodes()), dtype=float))

    @classmethod
    def from_interior(cls, grid: Grid, interior: np.ndarray) -> "GridFunction":
        """Wrap interior values with zero Dirichlet boundary entries."""
        vals = np.zeros(grid.M + 1)
        vals[1:-1] = interior
        return cls(grid, vals)

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1]

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())

    def restricted(self) -> "GridFunction":
        """Restriction to the coarsened grid by even-index selection."""
        return GridFunction(self.grid.coarsened(), self.values[::2].copy())

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l2_norm(self) -> float:
        """Discrete L2 norm ``sqrt(h * sum v_j**2)``."""
        return float(np.sqrt(self.grid.h * np.sum(self.values ** 2)))
