"""Uniform time grids, sampled paths and their CSV serialization."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping

import numpy as np

_GRID_RTOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_start + k*dt``, ``k = 0..n_steps``."""

    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps <= 0:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        if not self.t_end > self.t_start:
            raise ValueError(f"empty grid [{self.t_start}, {self.t_end}]")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    @cached_property
    def times(self) -> np.ndarray:
        # k*dt, never a running sum
        t = self.t_start + np.arange(self.n_steps + 1) * self.dt
        t[-1] = self.t_end
        t.setflags(write=False)
        return t

    def index_of(self, t: float) -> int:
        """Index of grid point ``t``; raises if ``t`` is not on the grid."""
        q = (t - self.t_start) / self.dt
        k = int(round(q))
        if abs(q - k) > _GRID_RTOL * max(1.0, abs(q)) or not 0 <= k <= self.n_steps:
            raise ValueError(f"time {t} is not a point of {self}")
        return k

    def contains(self, t: float) -> bool:
        try:
            self.index_of(t)
        except ValueError:
            return False
        return True

    def subgrid(self, factor: int) -> "TimeGrid":
        """Grid keeping every ``factor``-th point."""
        if self.n_steps % factor:
            raise ValueError(f"{factor} does not divide {self.n_steps}")
        return TimeGrid(self.t_start, self.t_end, self.n_steps // factor)


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Vector-valued path on a :class:`TimeGrid`, one row per grid point.

    Off-grid evaluation is piecewise linear. ``values`` is stored read-only.
    """

    grid: TimeGrid
    values: np.ndarray
    info: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.grid.n_steps + 1:
            raise ValueError(
                f"values shape {v.shape} does not match grid with {self.grid.n_steps + 1} points"
            )
        if v.shape[1] < 1:
            raise ValueError("a path needs at least one dimension")
        if not np.all(np.isfinite(v)):
            bad = int(np.argwhere(~np.isfinite(v))[0, 0])
            raise ValueError(f"non-finite path value at grid index {bad}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "info", dict(self.info))

    @property
    def dims(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def interpolation(self) -> str:
        return "piecewise-linear"

    def __call__(self, t):
        """Evaluate at time(s) ``t``; returns shape ``t.shape + (dims,)``."""
        t = np.asarray(t, dtype=float)
        tt = self.grid.times
        if np.any(t < tt[0] - 1e-12) or np.any(t > tt[-1] + 1e-12):
            raise ValueError("evaluation outside the path's grid")
        cols = [np.interp(t, tt, self.values[:, j]) for j in range(self.dims)]
        return np.stack(cols, axis=-1)

    def at(self, t: float) -> np.ndarray:
        """Value at a grid point, read without interpolation."""
        return self.values[self.grid.index_of(t)]

    def scalar(self) -> np.ndarray:
        """Values of a one-dimensional path as a flat array."""
        if self.dims != 1:
            raise ValueError(f"path has {self.dims} dimensions")
        return self.values[:, 0]

    def replace_values(self, values, **info) -> "SamplePath":
        return SamplePath(self.grid, values, info)

    def _check_same_grid(self, other: "SamplePath"):
        if other.grid != self.grid:
            raise ValueError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other):
        if isinstance(other, SamplePath):
            self._check_same_grid(other)
            return self.replace_values(self.values + other.values)
        return self.replace_values(self.values + np.asarray(other, dtype=float))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, SamplePath):
            self._check_same_grid(other)
            return self.replace_values(self.values - other.values)
        return self.replace_values(self.values - np.asarray(other, dtype=float))

    def __neg__(self):
        return self.replace_values(-self.values)

    def __mul__(self, c):
        return self.replace_values(self.values * float(c))

    __rmul__ = __mul__

    @classmethod
    def from_function(cls, grid: TimeGrid, func, **info) -> "SamplePath":
        return cls(grid, np.asarray(func(grid.times), dtype=float), info)

    @classmethod
    def constant(cls, grid: TimeGrid, value) -> "SamplePath":
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(grid, np.broadcast_to(value, (grid.n_steps + 1, value.size)))


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta")


def write_meta(path, meta: Mapping[str, Any]) -> None:
    """Write ``key = value`` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in meta.items():
            fh.write(f"{key} = {value}\n")


def read_meta(path) -> dict[str, str]:
    meta = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            meta[key.strip()] = value.strip()
    return meta


def write_path_csv(path: SamplePath, filename, meta: Mapping[str, Any] | None = None) -> Path:
    """Write ``t,v0,...`` rows at full precision plus a ``.meta`` sidecar."""
    filename = Path(filename)
    with open(filename, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"v{j}" for j in range(path.dims)])
        for t, row in zip(path.times, path.values):
            writer.writerow([repr(float(t))] + [repr(float(x)) for x in row])
    sidecar = {
        "t_start": repr(path.grid.t_start),
        "t_end": repr(path.grid.t_end),
        "n_steps": path.grid.n_steps,
        "dims": path.dims,
        "interpolation": path.interpolation,
    }
    sidecar.update({k: v for k, v in path.info.items()})
    sidecar.update(meta or {})
    write_meta(_meta_path(filename), sidecar)
    return filename


def read_path_csv(filename) -> SamplePath:
    filename = Path(filename)
    data = np.loadtxt(filename, delimiter=",", skiprows=1, ndmin=2)
    meta_file = _meta_path(filename)
    if meta_file.exists():
        meta = read_meta(meta_file)
        grid = TimeGrid(float(meta["t_start"]), float(meta["t_end"]), int(meta["n_steps"]))
    else:
        grid = TimeGrid(float(data[0, 0]), float(data[-1, 0]), data.shape[0] - 1)
        meta = {}
    return SamplePath(grid, data[:, 1:], meta)
