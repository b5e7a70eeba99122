"""Explicit solvers for mixed stochastic delay equations

    dX(t) = a(t, X_t) dt + b(t, X_t) dW(t) + c(t, X_t) dZ(t),   X = eta on [-r, 0],

where ``X_t`` is the segment ``s -> X(t + s)``, ``s in [-r, 0]``.

The state array may carry leading batch axes ``(..., n_points, d)``; built-in
coefficients broadcast over them, so a whole Monte Carlo chunk steps at once.
Per-path results do not depend on the batch size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .grid import SamplePath, TimeGrid
from .norms import NormConfig, solution_norm
from .paths import InitialSegment, smooth_driver, stop_driver, stopping_time_tau_N

Coefficient = Callable[[float, "SegmentView"], np.ndarray]


class SolverError(FloatingPointError):
    """A step produced a non-finite state."""

    def __init__(self, step: int, t: float):
        super().__init__(f"non-finite state at step {step} (t={t})")
        self.step = step
        self.t = t


class ShapeError(ValueError):
    """A coefficient returned an array of the wrong shape."""


class SegmentView:
    """Read-only window ``s -> X(t + s)``, ``s in [-r, 0]``, of a solution array.

    Evaluation interpolates linearly between grid points and never reads past
    the anchor ``t``.
    """

    __slots__ = ("_X", "_anchor", "_cells", "dt", "t", "step")

    def __init__(self, X: np.ndarray, anchor: int, cells: int, dt: float, t: float, step: int = 0):
        if anchor < cells:
            raise ValueError("segment reaches before the start of the history")
        self._X = X
        self._anchor = anchor
        self._cells = cells
        self.dt = dt
        self.t = t
        self.step = step

    @property
    def r(self) -> float:
        return self._cells * self.dt

    def __call__(self, s: float) -> np.ndarray:
        q = s / self.dt
        if q > 1e-9:
            raise ValueError(f"segment argument {s} lies in the future")
        if q < -self._cells - 1e-9:
            raise ValueError(f"segment argument {s} lies before -r")
        k = round(q)
        if abs(q - k) <= 1e-9 * max(1.0, abs(q)):
            return self._X[..., self._anchor + k, :]
        j = math.floor(q)
        f = q - j
        return (1.0 - f) * self._X[..., self._anchor + j, :] + f * self._X[..., self._anchor + j + 1, :]

    @property
    def values(self) -> np.ndarray:
        """Segment values at the grid points of ``[t - r, t]``."""
        v = self._X[..., self._anchor - self._cells : self._anchor + 1, :].view()
        v.flags.writeable = False
        return v

    def sup(self) -> np.ndarray:
        """``||X_t||_C`` on the grid."""
        return np.linalg.norm(self.values, axis=-1).max(axis=-1)


def segment_of(values: np.ndarray, r: float, t: float = 0.0) -> SegmentView:
    """Wrap an array of segment values on ``[-r, 0]`` as a :class:`SegmentView`."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    cells = values.shape[-2] - 1
    return SegmentView(values, cells, cells, r / cells, t)


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Coefficients ``a``, ``b``, ``c`` with their declared regularity constants.

    ``a`` returns shape ``(d,)``, ``b`` ``(d, m)``, ``c`` ``(d, l)`` (plus any
    batch axes of the segment). The metadata mirror the linear-growth bound,
    the Fréchet-derivative bound for ``c``, the local Lipschitz constants
    ``lipschitz(R)`` and the time-Hölder exponent/constant of ``c``; ``None``
    means undeclared.
    """

    a: Coefficient
    b: Coefficient
    c: Coefficient
    d: int = 1
    m: int = 1
    l: int = 1
    growth: float | None = None
    frechet_bound: float | None = None
    lipschitz: Callable[[float], float] | None = None
    beta: float | None = None
    time_holder: float | None = None
    name: str = "custom"
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for dim in ("d", "m", "l"):
            v = getattr(self, dim)
            if int(v) != v or v < 1:
                raise ValueError(f"{dim} must be a positive integer, got {v}")
        for key in ("growth", "frechet_bound", "time_holder"):
            v = getattr(self, key)
            if v is not None and not v >= 0:
                raise ValueError(f"{key} must be non-negative, got {v}")
        if self.beta is not None and not 0.0 < self.beta <= 1.0:
            raise ValueError(f"time-Hölder exponent must lie in (0, 1], got {self.beta}")


@dataclass(frozen=True, eq=False)
class SddeProblem:
    """Coefficients, initial segment and one pair of driver paths."""

    coefficients: CoefficientSet
    initial: InitialSegment
    W: SamplePath
    Z: SamplePath
    alpha: float
    gamma: float

    def __post_init__(self):
        co = self.coefficients
        if self.W.grid != self.Z.grid:
            raise ValueError("W and Z must share a grid")
        if self.W.grid.t_start != 0.0:
            raise ValueError("driver grids start at 0")
        if self.W.dims != co.m or self.Z.dims != co.l:
            raise ValueError(f"driver dims ({self.W.dims}, {self.Z.dims}) != (m, l) = ({co.m}, {co.l})")
        if self.initial.values.dims != co.d:
            raise ValueError(f"initial segment has {self.initial.values.dims} dims, expected d={co.d}")
        if not math.isclose(self.initial.values.grid.dt, self.W.grid.dt, rel_tol=1e-9):
            raise ValueError("initial segment and drivers use different step sizes")
        if not 0.5 < self.gamma <= 1.0:
            raise ValueError(f"driver Hölder exponent must lie in (1/2, 1], got {self.gamma}")
        self.initial.check_driver_exponent(self.gamma)
        NormConfig(self.alpha, self.gamma, self.initial.theta)
        if co.beta is not None and not co.beta > 1.0 - self.gamma:
            raise ValueError(f"beta={co.beta} must exceed 1 - gamma = {1 - self.gamma}")

    @property
    def T(self) -> float:
        return self.W.grid.t_end

    @property
    def r(self) -> float:
        return self.initial.r

    @property
    def solution_grid(self) -> TimeGrid:
        return solution_grid(self.initial, self.W.grid)

    def with_drivers(self, W: SamplePath | None = None, Z: SamplePath | None = None) -> "SddeProblem":
        return SddeProblem(self.coefficients, self.initial, W or self.W, Z or self.Z, self.alpha, self.gamma)


@dataclass(frozen=True, eq=False)
class SolutionPath:
    """Solution on ``[-r, T]`` with the scheme name and run diagnostics."""

    path: SamplePath
    solver: str
    diagnostics: Mapping[str, Any] = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return self.path.values

    @property
    def grid(self) -> TimeGrid:
        return self.path.grid


def solution_grid(initial: InitialSegment, driver_grid: TimeGrid) -> TimeGrid:
    n_hist = initial.values.grid.n_steps
    return TimeGrid(-initial.r, driver_grid.t_end, n_hist + driver_grid.n_steps)


# ---------------------------------------------------------------- stepping core


def _contract(mat: np.ndarray, vec: np.ndarray) -> np.ndarray:
    # (..., d, k) x (..., k) -> (..., d), summing k in a fixed order
    out = mat[..., 0] * vec[..., 0:1]
    for j in range(1, mat.shape[-1]):
        out = out + mat[..., j] * vec[..., j : j + 1]
    return out


def _probe_shapes(co: CoefficientSet, seg: SegmentView, t: float, batch: tuple, use_w: bool, use_z: bool):
    checks = [("a", co.a, (co.d,))]
    if use_w:
        checks.append(("b", co.b, (co.d, co.m)))
    if use_z:
        checks.append(("c", co.c, (co.d, co.l)))
    for name, fn, shape in checks:
        out = np.asarray(fn(t, seg), dtype=float)
        target = batch + shape
        try:
            if np.broadcast_shapes(out.shape, target) != target:
                raise ValueError
        except ValueError:
            raise ShapeError(f"coefficient {name} returned shape {out.shape}, expected {target}") from None


def euler_steps(
    co: CoefficientSet,
    X: np.ndarray,
    n_hist: int,
    times: np.ndarray,
    dW: np.ndarray | None,
    dZ: np.ndarray | None,
    drift: Coefficient | None = None,
) -> np.ndarray:
    """Fill ``X[..., n_hist+1:, :]`` in place by the left-point Euler scheme.

    ``X[..., :n_hist+1, :]`` must already hold the initial segment. ``dW`` and
    ``dZ`` are driver increments ``(..., n, m)`` / ``(..., n, l)``; ``None``
    drops the term.
    """
    dt = times[1] - times[0]
    n = times.shape[0] - 1
    a = co.a if drift is None else drift
    batch = X.shape[:-2]
    probe = SegmentView(X, n_hist, n_hist, dt, float(times[0]), 0)
    _probe_shapes(co if drift is None else _with_drift(co, drift), probe, float(times[0]), batch,
                  dW is not None, dZ is not None)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            i = n_hist + k
            t = float(times[k])
            seg = SegmentView(X, i, n_hist, dt, t, k)
            nxt = X[..., i, :] + a(t, seg) * dt
            if dW is not None:
                nxt = nxt + _contract(co.b(t, seg), dW[..., k, :])
            if dZ is not None:
                nxt = nxt + _contract(co.c(t, seg), dZ[..., k, :])
            if not np.all(np.isfinite(nxt)):
                raise SolverError(k, t)
            X[..., i + 1, :] = nxt
    return X


def _with_drift(co: CoefficientSet, drift: Coefficient) -> CoefficientSet:
    return CoefficientSet(drift, co.b, co.c, co.d, co.m, co.l, name=co.name)


def _history_array(initial: InitialSegment, n: int, batch: tuple = ()) -> np.ndarray:
    n_hist = initial.values.grid.n_steps
    X = np.empty(batch + (n_hist + n + 1, initial.values.dims))
    X[..., : n_hist + 1, :] = initial.values.values
    return X


def solve_paths(
    co: CoefficientSet,
    initial: InitialSegment,
    driver_grid: TimeGrid,
    W: np.ndarray | None,
    Z: np.ndarray | None,
) -> np.ndarray:
    """Euler solution for arrays of driver values ``(..., n+1, m)`` / ``(..., n+1, l)``.

    Returns the state array ``(..., n_hist + n + 1, d)`` on ``[-r, T]``.
    """
    dW = None if W is None else np.diff(W, axis=-2)
    dZ = None if Z is None else np.diff(Z, axis=-2)
    batch = (dW if dW is not None else dZ).shape[:-2] if (dW is not None or dZ is not None) else ()
    X = _history_array(initial, driver_grid.n_steps, batch)
    return euler_steps(co, X, initial.values.grid.n_steps, driver_grid.times, dW, dZ)


def folded_drift(co: CoefficientSet, zdot: np.ndarray) -> Coefficient:
    """Random drift ``a + c * zdot`` with ``zdot[..., k, :]`` used on step ``k``."""

    def drift(t, seg):
        return co.a(t, seg) + _contract(co.c(t, seg), zdot[..., seg.step, :])

    return drift


def solve_smoothed_paths(
    co: CoefficientSet,
    initial: InitialSegment,
    driver_grid: TimeGrid,
    W: np.ndarray | None,
    Z_smoothed: np.ndarray,
) -> np.ndarray:
    """Classical delay equation with drift ``a + c * dZ^{N,n}/dt``.

    ``Z_smoothed`` holds mollified driver values ``(..., n+1, l)``; the drift
    uses its exact cell-average derivative on each step.
    """
    zdot = np.diff(Z_smoothed, axis=-2) / driver_grid.dt
    dW = None if W is None else np.diff(W, axis=-2)
    X = _history_array(initial, driver_grid.n_steps, zdot.shape[:-2])
    return euler_steps(co, X, initial.values.grid.n_steps, driver_grid.times, dW, None,
                       drift=folded_drift(co, zdot))


def _diagnostics(X: np.ndarray, n_hist: int) -> dict:
    inc = np.linalg.norm(np.diff(X[n_hist:], axis=0), axis=1)
    return {"steps": X.shape[0] - 1 - n_hist, "max_increment": float(inc.max()) if inc.size else 0.0}


def euler_solve(problem: SddeProblem) -> SolutionPath:
    """Left-point Euler scheme for all three integrals."""
    X = solve_paths(problem.coefficients, problem.initial, problem.W.grid, problem.W.values, problem.Z.values)
    n_hist = problem.initial.values.grid.n_steps
    path = SamplePath(problem.solution_grid, X, {"solver": "euler"})
    return SolutionPath(path, "euler", _diagnostics(X, n_hist))


def smoothed_solve(problem: SddeProblem, N: float, n) -> SolutionPath:
    """Solve the classical delay equation driven by the stopped, mollified driver.

    ``Z`` is stopped at the first time its ``alpha``-norm reaches ``N`` and
    averaged over windows of width ``1/n``; the ``c dZ`` term becomes the
    random drift ``c * d/dt Z^{N,n}``.
    """
    Z = problem.Z
    tau = stopping_time_tau_N(Z, problem.alpha, N)
    ZN = stop_driver(Z, tau)
    Zs = smooth_driver(ZN, n)
    X = solve_smoothed_paths(problem.coefficients, problem.initial, Z.grid, problem.W.values, Zs.values)
    n_hist = problem.initial.values.grid.n_steps
    path = SamplePath(problem.solution_grid, X, {"solver": "smoothed", "N": N, "n": n, "tau": tau})
    diag = _diagnostics(X, n_hist) | {"tau_N": tau, "N": N, "n": n}
    return SolutionPath(path, "smoothed", diag)


@dataclass(frozen=True)
class Distance:
    sup: float
    total: float


def _as_path(X) -> SamplePath:
    return X.path if isinstance(X, SolutionPath) else X


def solution_distance(X, Y, alpha: float, T: float | None = None) -> Distance:
    """``||X - Y||_{inf,T}`` and ``||X - Y||_T`` of two solutions on one grid."""
    X, Y = _as_path(X), _as_path(Y)
    if X.grid != Y.grid:
        raise ValueError(f"grid mismatch: {X.grid} vs {Y.grid}")
    T = X.grid.t_end if T is None else T
    rep = solution_norm(X - Y, T, alpha)
    return Distance(rep.sup_norm, rep.total)


def sup_distance(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Grid sup-distance over the last two axes of state arrays."""
    return np.linalg.norm(X - Y, axis=-1).max(axis=-1)


# ---------------------------------------------------------------- method of steps


@dataclass(frozen=True, eq=False)
class LinearDelayODE:
    """``x'(t) = sum_i A_i x(t - lag_i) + forcing`` with history ``x = eta`` on ``[-r, 0]``."""

    terms: Sequence[tuple[float, Any]]
    history: Callable[[float], Any]
    r: float
    forcing: Any = 0.0
    d: int = 1

    def __post_init__(self):
        for lag, _ in self.terms:
            if lag < 0 or lag > self.r + 1e-12:
                raise ValueError(f"lag {lag} outside [0, r={self.r}]")

    @classmethod
    def from_coefficients(cls, co: CoefficientSet, r: float, history) -> "LinearDelayODE":
        """Affine deterministic form of a registered coefficient set."""
        form = co.params.get("_linear_form")
        if form is None:
            raise ValueError(f"coefficient set {co.name!r} has no registered affine form")
        if form["stochastic"]:
            raise ValueError("method of steps needs a deterministic problem (b = c = 0)")
        terms = [(lag * r if rel else lag, A) for lag, A, rel in form["terms"]]
        return cls(terms, history, r, form.get("forcing", 0.0), co.d)


def method_of_steps_oracle(spec, grid: TimeGrid, rtol: float = 1e-11, atol: float = 1e-13) -> SolutionPath:
    """Solve a linear delay ODE interval by interval between lag breakpoints.

    Each interval is integrated with an adaptive 8th-order Runge-Kutta method;
    delayed values come from the history or from dense output of earlier
    intervals. The result is sampled on ``grid`` (which spans ``[-r, T]``).
    """
    if isinstance(spec, CoefficientSet):
        raise ValueError("pass a LinearDelayODE (see LinearDelayODE.from_coefficients)")
    if not isinstance(spec, LinearDelayODE):
        raise TypeError(f"expected LinearDelayODE, got {type(spec).__name__}")
    d = spec.d
    mats = [(float(lag), np.atleast_2d(np.asarray(A, dtype=float)).reshape(d, d)) for lag, A in spec.terms]
    forcing = np.broadcast_to(np.asarray(spec.forcing, dtype=float), (d,))
    inst = sum((A for lag, A in mats if lag == 0.0), np.zeros((d, d)))
    delayed = [(lag, A) for lag, A in mats if lag > 0.0]
    step = min((lag for lag, _ in delayed), default=grid.t_end)
    pieces: list = []

    def past(s):
        if s <= 0.0:
            return np.asarray(spec.history(s), dtype=float).reshape(d)
        for t0, t1, sol in pieces:
            if s <= t1 + 1e-14:
                return sol(min(max(s, t0), t1))
        raise RuntimeError(f"delayed time {s} not yet computed")

    def rhs(t, x):
        out = inst @ x + forcing
        for lag, A in delayed:
            out = out + A @ past(t - lag)
        return out

    T = grid.t_end
    t0 = 0.0
    x0 = past(0.0)
    while t0 < T - 1e-14:
        t1 = min(t0 + step, T)
        sol = solve_ivp(rhs, (t0, t1), x0, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
        if not sol.success:
            raise RuntimeError(sol.message)
        pieces.append((t0, t1, sol.sol))
        x0 = sol.y[:, -1]
        t0 = t1
    values = np.array([past(float(t)) for t in grid.times])
    path = SamplePath(grid, values, {"solver": "method-of-steps"})
    return SolutionPath(path, "method-of-steps", {"intervals": len(pieces)})
