"""Core value types: uniform time grids, sample paths, ensembles, brackets.

All types are immutable after construction and safe to share between threads;
array payloads are copied in and marked read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_hurst

PATH_ROLES = ("X", "Y", "M", "W", "other")


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HurstIndex:
    """Self-similarity index H; construction rejects values outside (0, 1)."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", check_hurst(self.value))

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = horizon * k / n_steps, k = 0..n_steps.

    ``n_steps = 0`` is the degenerate single-point grid {0}, accepted so that
    generators can produce the trivial ensemble.
    """

    horizon: float
    n_steps: int

    def __post_init__(self):
        if not np.isfinite(self.horizon) or self.horizon <= 0:
            raise ValueError(f"horizon must be a positive real, got {self.horizon!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise ValueError(f"n_steps must be a non-negative integer, got {self.n_steps!r}")
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def spacing(self) -> float:
        if self.n_steps == 0:
            raise ValueError("degenerate grid has no spacing")
        return self.horizon / self.n_steps

    @property
    def points(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        """Cell midpoints s_j* = (t_{j-1} + t_j) / 2, strictly inside each cell."""
        pts = self.points
        return 0.5 * (pts[:-1] + pts[1:])

    def index_of(self, t: float, *, tol: float = 1e-9) -> int:
        """Grid index k with t_k == t, rejecting off-grid times."""
        frac = t / self.horizon * self.n_steps
        k = int(round(frac))
        if not 0 <= k <= self.n_steps or abs(frac - k) > tol * max(1, self.n_steps):
            raise ValueError(
                f"time {t} is not a grid point of horizon={self.horizon}, "
                f"n_steps={self.n_steps}; choose n_steps so that t*n/horizon is an integer"
            )
        return k


@dataclass(frozen=True)
class SamplePath:
    """A process observed on a uniform grid; values[0] must be 0."""

    grid: TimeGrid
    values: np.ndarray
    role: str = "other"

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 1 or len(values) != self.grid.n_steps + 1:
            raise ValueError(
                f"values must be 1-d of length n_steps+1={self.grid.n_steps + 1}, "
                f"got shape {values.shape}"
            )
        if not np.isfinite(values).all():
            raise ValueError("path values must be finite")
        if values[0] != 0.0:
            raise ValueError(f"paths start at zero; got values[0]={values[0]}")
        if self.role not in PATH_ROLES:
            raise ValueError(f"role must be one of {PATH_ROLES}, got {self.role!r}")
        object.__setattr__(self, "values", values)

    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def with_role(self, role: str) -> "SamplePath":
        return SamplePath(self.grid, self.values, role)


@dataclass(frozen=True)
class PathEnsemble:
    """N independent paths on one shared grid.

    ``seed`` is the ensemble seed when the paths were simulated here (path i is
    reproducible from (seed, i)); it is None for paths loaded from files.
    """

    grid: TimeGrid
    paths: tuple
    hurst: HurstIndex | None = None
    seed: int | None = None

    def __post_init__(self):
        paths = tuple(self.paths)
        if not paths:
            raise ValueError("ensemble needs at least one path")
        for p in paths:
            if not isinstance(p, SamplePath):
                raise ValueError("ensemble entries must be SamplePath instances")
            if p.grid != self.grid:
                raise ValueError("all ensemble paths must share the ensemble grid")
        object.__setattr__(self, "paths", paths)

    def __len__(self) -> int:
        return len(self.paths)

    def to_matrix(self) -> np.ndarray:
        """Stack values into an (n_paths, n_steps + 1) array."""
        return np.vstack([p.values for p in self.paths])

    @classmethod
    def from_matrix(cls, X, grid: TimeGrid, *, role: str = "X",
                    hurst=None, seed: int | None = None) -> "PathEnsemble":
        X = np.asarray(X, dtype=float)
        hurst = HurstIndex(hurst) if hurst is not None and not isinstance(hurst, HurstIndex) else hurst
        paths = tuple(SamplePath(grid, row, role) for row in X)
        return cls(grid, paths, hurst, seed)


@dataclass(frozen=True)
class BracketPath:
    """Cumulative discrete quadratic bracket: non-decreasing, starts at 0."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 1 or len(values) != self.grid.n_steps + 1:
            raise ValueError("bracket length must match the grid")
        if values[0] != 0.0:
            raise ValueError("bracket starts at 0")
        if np.any(np.diff(values) < 0):
            raise ValueError("bracket must be non-decreasing")
        object.__setattr__(self, "values", values)
