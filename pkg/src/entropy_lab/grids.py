"""Periodic 1D grids, cell-averaged fields, and discrete integration.

All solvers share the same convention: the domain [0, length) is split into
n_cells uniform cells, values are cell averages attached to cell centers
(i + 1/2) * dx, and integrals are midpoint sums dx * sum(values).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidInputError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic grid on a circle of given length (default 2*pi)."""

    n_cells: int
    length: float = TWO_PI
    dx: float = field(init=False)
    cell_centers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_cells < 4:
            raise InvalidInputError(f"n_cells must be >= 4, got {self.n_cells}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise InvalidInputError(f"grid length must be positive, got {self.length}")
        dx = self.length / self.n_cells
        object.__setattr__(self, "dx", dx)
        centers = (np.arange(self.n_cells) + 0.5) * dx
        centers.setflags(write=False)
        object.__setattr__(self, "cell_centers", centers)

    def compatible_with(self, other: "PeriodicGrid") -> bool:
        return self.n_cells == other.n_cells and self.length == other.length


@dataclass
class ScalarField:
    """Cell-averaged scalar on a periodic grid at a single time."""

    grid: PeriodicGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_cells,):
            raise DimensionError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.n_cells} cells)"
            )
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("field values must be finite")

    @classmethod
    def from_function(cls, grid: PeriodicGrid, f, time: float = 0.0) -> "ScalarField":
        return cls(grid, f(grid.cell_centers), time)


class Trajectory:
    """Time-ordered snapshots of one field on a fixed grid.

    Snapshot times start at 0 and are uniformly spaced.
    """

    def __init__(self, snapshots):
        if len(snapshots) < 2:
            raise InvalidInputError("a trajectory needs at least two snapshots")
        grid = snapshots[0].grid
        for s in snapshots[1:]:
            if not grid.compatible_with(s.grid):
                raise DimensionError("all snapshots must share one grid")
        times = np.array([s.time for s in snapshots])
        if times[0] != 0.0:
            raise InvalidInputError("trajectory must start at t = 0")
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise InvalidInputError("snapshot times must be strictly increasing")
        if np.max(np.abs(steps - steps[0])) > 1e-10 * max(1.0, times[-1]):
            raise InvalidInputError("snapshot times must be uniformly spaced")
        self.snapshots = list(snapshots)
        self.grid = grid
        self.times = times
        self.dt_snap = float(steps[0])

    def __len__(self):
        return len(self.snapshots)

    def values_array(self) -> np.ndarray:
        """Stack snapshot values into an (n_times, n_cells) array."""
        return np.array([s.values for s in self.snapshots])


def integrate(f: ScalarField) -> float:
    """Midpoint quadrature of a cell-averaged field over the whole circle."""
    if not np.all(np.isfinite(f.values)):
        raise InvalidInputError("cannot integrate non-finite values")
    return float(f.grid.dx * np.sum(f.values))


def l1_distance(a: ScalarField, b: ScalarField) -> float:
    """Discrete L1 distance dx * sum |a_i - b_i| between two fields."""
    if not a.grid.compatible_with(b.grid):
        raise DimensionError("fields live on different grids")
    return float(a.grid.dx * np.sum(np.abs(a.values - b.values)))
