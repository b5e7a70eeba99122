"""Driver paths: Wiener and fractional Brownian motion, stopping and mollification."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, toeplitz

from .grid import SamplePath, TimeGrid
from .norms import alpha_norm_profile, holder_seminorm

logger = logging.getLogger(__name__)

_EIG_TOL = 1e-10


def substream(master_seed: int, *keys: int) -> np.random.SeedSequence:
    """Seed for an independent substream, e.g. ``(seed, replica, driver)``.

    Derivation: ``SeedSequence(entropy=master_seed, spawn_key=keys)``.
    """
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in keys))


@dataclass(frozen=True)
class FbmParams:
    H: float
    dims: int = 1
    seed: int | np.random.SeedSequence | None = None

    def __post_init__(self):
        if not 0.5 < self.H < 1.0:
            raise ValueError(f"Hurst exponent must lie in (1/2, 1), got {self.H}")
        if int(self.dims) != self.dims or self.dims < 1:
            raise ValueError(f"dims must be a positive integer, got {self.dims}")


@dataclass(frozen=True)
class InitialSegment:
    """Initial condition on ``[-r, 0]`` with declared Hölder exponent ``theta``."""

    r: float
    theta: float
    values: SamplePath

    def __post_init__(self):
        grid = self.values.grid
        if not self.r > 0:
            raise ValueError(f"delay must be positive, got {self.r}")
        if not (np.isclose(grid.t_start, -self.r) and grid.t_end == 0.0):
            raise ValueError(f"initial segment must live on [-{self.r}, 0], got {grid}")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")
        if not np.isfinite(holder_seminorm(self.values, self.theta)):
            raise ValueError("initial segment has infinite Hölder quotient")

    def check_driver_exponent(self, gamma: float) -> None:
        if not self.theta > 1.0 - gamma:
            raise ValueError(f"theta={self.theta} must exceed 1 - gamma = {1 - gamma}")

    @property
    def holder_constant(self) -> float:
        return holder_seminorm(self.values, self.theta)

    @classmethod
    def constant(cls, x0, r: float, n_steps: int, theta: float = 1.0) -> "InitialSegment":
        grid = TimeGrid(-r, 0.0, n_steps)
        return cls(r, theta, SamplePath.constant(grid, x0))

    @classmethod
    def from_function(cls, func, r: float, n_steps: int, theta: float = 1.0) -> "InitialSegment":
        grid = TimeGrid(-r, 0.0, n_steps)
        return cls(r, theta, SamplePath.from_function(grid, func))


def _check_driver_grid(grid: TimeGrid):
    if grid.t_start != 0.0:
        raise ValueError(f"driver grids start at 0, got {grid.t_start}")


# ---------------------------------------------------------------- Wiener


def generate_wiener(grid: TimeGrid, dims: int, seed) -> SamplePath:
    """Standard Wiener path with independent ``N(0, dt)`` increments."""
    _check_driver_grid(grid)
    if int(dims) != dims or dims < 1:
        raise ValueError(f"dims must be a positive integer, got {dims}")
    rng = np.random.default_rng(seed)
    inc = rng.standard_normal((grid.n_steps, dims)) * np.sqrt(grid.dt)
    values = np.zeros((grid.n_steps + 1, dims))
    np.cumsum(inc, axis=0, out=values[1:])
    return SamplePath(grid, values, {"kind": "wiener"})


# ---------------------------------------------------------------- fBm


def fgn_autocovariance(k, H: float) -> np.ndarray:
    """Autocovariance of unit-spacing fractional Gaussian noise at lag ``k``."""
    k = np.abs(np.asarray(k, dtype=float))
    h2 = 2.0 * H
    return 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)


def fbm_covariance(s, t, H: float) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    h2 = 2.0 * H
    return 0.5 * (np.abs(s) ** h2 + np.abs(t) ** h2 - np.abs(t - s) ** h2)


def circulant_eigenvalues(n: int, H: float) -> np.ndarray:
    """Eigenvalues of the size-``2n`` circulant embedding of the fGn covariance."""
    rho = fgn_autocovariance(np.arange(n + 1), H)
    row = np.concatenate([rho, rho[-2:0:-1]])
    return np.fft.fft(row).real


def _davies_harte(n: int, H: float, size: int, rng, eig: np.ndarray) -> np.ndarray:
    scale = np.sqrt(np.clip(eig, 0.0, None) / (2 * n))
    out = np.empty((size, n))
    chunk = max(1, 2**22 // (2 * n))
    for start in range(0, size, chunk):
        rows = min(chunk, size - start)
        xi = rng.standard_normal((rows, 2 * n)) + 1j * rng.standard_normal((rows, 2 * n))
        out[start : start + rows] = np.fft.fft(scale * xi, axis=1)[:, :n].real
    return out


def _cholesky_fgn(n: int, H: float, size: int, rng) -> np.ndarray:
    cov = toeplitz(fgn_autocovariance(np.arange(n), H))
    L = cholesky(cov, lower=True)
    return rng.standard_normal((size, n)) @ L.T


def fgn_samples(n: int, H: float, size: int, rng, method: str = "auto") -> tuple[np.ndarray, str]:
    """``size`` rows of unit-spacing fGn of length ``n`` and the method used.

    ``method="auto"`` uses circulant embedding and falls back to a dense
    Cholesky factor when the embedding has a negative eigenvalue.
    """
    if method not in ("auto", "davies-harte", "cholesky"):
        raise ValueError(f"unknown fBm method {method!r}")
    if method != "cholesky":
        eig = circulant_eigenvalues(n, H)
        if eig.min() >= -_EIG_TOL * eig.max():
            return _davies_harte(n, H, size, rng, eig), "davies-harte"
        if method == "davies-harte":
            raise ValueError(f"circulant embedding is not nonnegative definite for H={H}, n={n}")
        logger.warning("circulant embedding failed (min eigenvalue %.3g); using Cholesky", eig.min())
    return _cholesky_fgn(n, H, size, rng), "cholesky"


def generate_fbm(grid: TimeGrid, params: FbmParams, method: str = "auto") -> SamplePath:
    """Fractional Brownian motion with independent components on ``grid``.

    The method actually used is recorded in ``path.info["method"]``.
    """
    _check_driver_grid(grid)
    rng = np.random.default_rng(params.seed)
    n = grid.n_steps
    inc, used = fgn_samples(n, params.H, params.dims, rng, method)
    values = np.zeros((n + 1, params.dims))
    np.cumsum(inc.T * grid.dt**params.H, axis=0, out=values[1:])
    return SamplePath(grid, values, {"kind": "fbm", "H": params.H, "method": used})


def fbm_batch(grid: TimeGrid, H: float, n_paths: int, seed, method: str = "auto") -> np.ndarray:
    """``n_paths`` independent scalar fBm paths as an array ``(n_paths, n+1)``."""
    _check_driver_grid(grid)
    FbmParams(H)
    rng = np.random.default_rng(seed)
    inc, _ = fgn_samples(grid.n_steps, H, n_paths, rng, method)
    out = np.zeros((n_paths, grid.n_steps + 1))
    np.cumsum(inc * grid.dt**H, axis=1, out=out[:, 1:])
    return out


# ---------------------------------------------------------------- stopping


def stopping_time_tau_N(Z: SamplePath, alpha: float, N: float) -> float:
    """First grid time ``t > 0`` with ``||Z||_{alpha;[0,t]} >= N``, else the end time."""
    _check_driver_grid(Z.grid)
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    if N < 0:
        raise ValueError(f"threshold must be non-negative, got {N}")
    if np.isinf(N):
        return float(Z.grid.t_end)
    prof = alpha_norm_profile(Z, alpha)
    hits = np.flatnonzero(prof[1:] >= N)
    if hits.size == 0:
        return float(Z.grid.t_end)
    return float(Z.grid.times[hits[0] + 1])


def stop_driver(Z: SamplePath, tau: float) -> SamplePath:
    """``Z(t ^ tau)``; ``tau`` must be a grid point."""
    k = Z.grid.index_of(tau)
    values = np.array(Z.values)
    values[k + 1 :] = values[k]
    return Z.replace_values(values, **{**Z.info, "stopped_at": float(Z.grid.times[k])})


# ---------------------------------------------------------------- mollification


def _window_cells(grid: TimeGrid, n) -> float:
    if not n >= 1:
        raise ValueError(f"mollification parameter must be >= 1, got {n}")
    w = (1.0 / n) / grid.dt
    if w < 1.0 - 1e-9:
        raise ValueError(f"window 1/n = {1.0 / n} is narrower than dt = {grid.dt}")
    rw = round(w)
    return float(rw) if abs(w - rw) < 1e-9 * max(1.0, w) else w


def _lagged_values(y: np.ndarray, q: np.ndarray) -> np.ndarray:
    # y at fractional index q (piecewise linear), constant y[0] for q < 0
    q = np.maximum(q, 0.0)
    j = np.minimum(np.floor(q).astype(int), y.shape[0] - 2)
    f = (q - j)[:, None]
    return y[j] * (1.0 - f) + y[j + 1] * f


def _cumulative_integral(y: np.ndarray, q: np.ndarray, C: np.ndarray) -> np.ndarray:
    # integral of the interpolant from index 0 to fractional index q, in cell units;
    # left of 0 the path is extended by y[0]
    out = np.empty((q.size, y.shape[1]))
    neg = q < 0
    out[neg] = y[0] * q[neg, None]
    qp = q[~neg]
    j = np.minimum(np.floor(qp).astype(int), y.shape[0] - 2)
    f = (qp - j)[:, None]
    out[~neg] = C[j] + f * y[j] + 0.5 * f * f * (y[j + 1] - y[j])
    return out


def smooth_driver(ZN: SamplePath, n) -> SamplePath:
    """Sliding-window average ``n * int_{t-1/n}^t Z(s) ds``.

    Before time 0 the path is extended by ``Z(0)``; for drivers started at 0
    this coincides with integrating over ``[(t - 1/n) v 0, t]``. The window
    integral is exact for the piecewise-linear interpolant (trapezoidal rule
    when the window spans whole cells).
    """
    w = _window_cells(ZN.grid, n)
    y = ZN.values
    C = np.zeros_like(y)
    np.cumsum(0.5 * (y[1:] + y[:-1]), axis=0, out=C[1:])
    k = np.arange(y.shape[0], dtype=float)
    if float(w).is_integer():
        wi = int(w)
        lagged = np.empty_like(y)
        head = min(wi, y.shape[0])
        lagged[:head] = y[0] * (k[:head] - wi)[:, None]
        lagged[head:] = C[: y.shape[0] - wi]
    else:
        lagged = _cumulative_integral(y, k - w, C)
    values = (C - lagged) / w
    return ZN.replace_values(values, **{**ZN.info, "mollified": float(n)})


def derivative_of_smoothed(ZN: SamplePath, n) -> SamplePath:
    """``n * (Z(t) - Z(t - 1/n))`` with ``Z`` extended by ``Z(0)`` before 0."""
    w = _window_cells(ZN.grid, n)
    y = ZN.values
    k = np.arange(y.shape[0], dtype=float)
    if float(w).is_integer():
        wi = int(w)
        lagged = np.empty_like(y)
        head = min(wi, y.shape[0])
        lagged[:head] = y[0]
        lagged[head:] = y[: y.shape[0] - wi]
    else:
        lagged = _lagged_values(y, k - w)
    values = (y - lagged) / (w * ZN.grid.dt)
    return ZN.replace_values(values, **{**ZN.info, "derivative_of_mollified": float(n)})
