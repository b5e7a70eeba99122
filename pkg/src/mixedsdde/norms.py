"""Hölder-type norm functionals of discretized paths.

All suprema run over grid points only and every singular kernel is
integrated with the product-trapezoid rule of :mod:`mixedsdde._quadrature`,
so the functionals are exact for piecewise-linear paths up to the
restriction of suprema to the grid. Vector values are measured with the
Euclidean norm.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numba
import numpy as np

from ._quadrature import cell_weights
from .grid import SamplePath


@dataclass(frozen=True)
class NormConfig:
    """Exponent for the fractional norms, checked against path regularities."""

    alpha: float
    gamma: float | None = None
    theta: float | None = None
    rule: str = "product-trapezoid"

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValueError(f"alpha must lie in (0, 1/2), got {self.alpha}")
        if self.gamma is not None and not self.alpha > 1.0 - self.gamma:
            raise ValueError(f"alpha={self.alpha} must exceed 1 - gamma = {1 - self.gamma}")
        if self.theta is not None and not self.alpha < self.theta:
            raise ValueError(f"alpha={self.alpha} must be below theta={self.theta}")
        if self.rule != "product-trapezoid":
            raise ValueError(f"unknown quadrature rule {self.rule!r}")


@dataclass(frozen=True, eq=False)
class NormReport:
    """``sup_norm``, ``one_norm`` and their sum at the final time, with profiles."""

    sup_norm: float
    one_norm: float
    total: float
    t: np.ndarray
    sup_profile: np.ndarray
    one_profile: np.ndarray

    @property
    def total_profile(self) -> np.ndarray:
        return self.sup_profile + self.one_profile

    def rows(self):
        for t, s, o in zip(self.t, self.sup_profile, self.one_profile):
            yield float(t), float(s), float(o), float(s + o)

    def to_csv(self, filename) -> None:
        with open(filename, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "sup", "one", "total"])
            for row in self.rows():
                writer.writerow([repr(x) for x in row])


# ---------------------------------------------------------------- kernels


@numba.njit(cache=True, inline="always")
def _dist(y, i, j):
    d = y.shape[1]
    if d == 1:
        return abs(y[i, 0] - y[j, 0])
    acc = 0.0
    for c in range(d):
        diff = y[i, c] - y[j, c]
        acc += diff * diff
    return np.sqrt(acc)


@numba.njit(cache=True)
def _holder_kernel(y, lagpow):
    K = y.shape[0] - 1
    best = 0.0
    for u in range(K):
        for v in range(u + 1, K + 1):
            q = _dist(y, v, u) * lagpow[v - u]
            if q > best:
                best = q
    return best


@numba.njit(cache=True)
def _alpha_kernel(y, A, B, lagpow):
    # best[v] = max over u < v of the alpha-norm functional of the pair (u, v)
    K = y.shape[0] - 1
    best = np.zeros(K + 1)
    for u in range(K):
        Q = 0.0
        prev = 0.0
        for v in range(u + 1, K + 1):
            m = v - u
            phi = _dist(y, v, u)
            Q += prev * A[m - 1] + phi * B[m - 1]
            F = phi * lagpow[m] + Q
            if F > best[v]:
                best[v] = F
            prev = phi
    return best


@numba.njit(cache=True)
def _one_norm_kernel(y, i0, w_full, w_last):
    # prof[k] = sum over lags m of w(m; k - i0) * max_{m <= j <= k} |y[j] - y[j-m]|
    K = y.shape[0] - 1
    prof = np.zeros(K + 1)
    for m in range(1, K - i0 + 1):
        R = 0.0
        for j in range(m, K + 1):
            phi = _dist(y, j, j - m)
            if phi > R:
                R = phi
            Mk = j - i0
            if Mk > m:
                prof[j] += w_full[m] * R
            elif Mk == m:
                prof[j] += w_last[m] * R
    return prof


@numba.njit(cache=True)
def _abs_lag_kernel(y, w_full, w_last):
    # acc[k] = sum_{m=1}^{k} w(m; k) |y[k] - y[k-m]|
    K = y.shape[0] - 1
    acc = np.zeros(K + 1)
    for k in range(1, K + 1):
        s = 0.0
        for m in range(1, k):
            s += w_full[m] * _dist(y, k, k - m)
        s += w_last[k] * _dist(y, k, 0)
        acc[k] = s
    return acc


def lag_weight_pair(K: int, kappa: float) -> tuple[np.ndarray, np.ndarray]:
    """Weights of lag node ``m`` when interior (``w_full``) or last (``w_last``)."""
    A, B = cell_weights(K + 1, kappa)
    w_full = np.zeros(K + 1)
    w_last = np.zeros(K + 1)
    w_full[1:] = A[1:] + B[:-1]
    w_last[1:] = B[:-1]
    return w_full, w_last


# ---------------------------------------------------------------- helpers


def _slice(path: SamplePath, a, b) -> tuple[np.ndarray, int]:
    grid = path.grid
    ia = 0 if a is None else grid.index_of(a)
    ib = grid.n_steps if b is None else grid.index_of(b)
    if ib <= ia:
        raise ValueError(f"empty interval [{a}, {b}]")
    return np.ascontiguousarray(path.values[ia : ib + 1]), ia


def _lagpow(K: int, exponent: float) -> np.ndarray:
    m = np.arange(K + 1, dtype=float)
    out = np.zeros(K + 1)
    out[1:] = m[1:] ** exponent
    return out


# ---------------------------------------------------------------- public API


def holder_seminorm(path: SamplePath, lam: float, a: float | None = None, b: float | None = None) -> float:
    """Largest ``|x(v) - x(u)| / (v - u)**lam`` over grid pairs in ``[a, b]``."""
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"exponent must lie in (0, 1], got {lam}")
    y, _ = _slice(path, a, b)
    K = y.shape[0] - 1
    dt = path.grid.dt
    return float(_holder_kernel(y, _lagpow(K, -lam)) * dt ** (-lam))


def alpha_norm_profile(g: SamplePath, alpha: float, a: float | None = None) -> np.ndarray:
    """``||g||_{alpha;[a, t_k]}`` for every grid point ``t_k >= a`` (first entry 0)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    y, _ = _slice(g, a, None)
    K = y.shape[0] - 1
    A, B = cell_weights(K, 2.0 - alpha)
    best = _alpha_kernel(y, A, B, _lagpow(K, alpha - 1.0))
    return np.maximum.accumulate(best) * g.grid.dt ** (alpha - 1.0)


def alpha_norm(g: SamplePath, alpha: float, a: float | None = None, b: float | None = None) -> float:
    """Fractional norm ``||g||_{alpha;[a,b]}`` of a path.

    Supremum over grid pairs ``u < v`` of the increment quotient with exponent
    ``1 - alpha`` plus ``int_u^v |g(u) - g(z)| (z - u)**(alpha - 2) dz``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    y, _ = _slice(g, a, b)
    K = y.shape[0] - 1
    A, B = cell_weights(K, 2.0 - alpha)
    best = _alpha_kernel(y, A, B, _lagpow(K, alpha - 1.0))
    return float(best.max() * g.grid.dt ** (alpha - 1.0))


def _zero_index(X: SamplePath) -> int:
    if X.grid.t_start > 0:
        raise ValueError("path must cover time 0")
    return X.grid.index_of(0.0)


def sup_norm_profile(X: SamplePath) -> np.ndarray:
    """``||X||_{inf,t}`` at every grid time ``t >= 0``."""
    i0 = _zero_index(X)
    run = np.maximum.accumulate(np.linalg.norm(X.values, axis=1))
    return run[i0:]


def sup_norm_history(X: SamplePath, t: float) -> float:
    """``max |X(s)|`` over grid points ``s`` in ``[t_start, t]``."""
    k = X.grid.index_of(t)
    _zero_index(X)
    if X.grid.times[k] < 0:
        raise ValueError(f"t={t} must be non-negative")
    return float(np.linalg.norm(X.values[: k + 1], axis=1).max())


def _check_alpha(alpha, regularity):
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    if regularity is not None and alpha >= regularity:
        raise ValueError(
            f"alpha={alpha} is not below the declared path regularity {regularity}; "
            "the singular integral may diverge"
        )


def _one_norm_values(y: np.ndarray, i0: int, dt: float, alpha: float) -> np.ndarray:
    K = y.shape[0] - 1
    if K == i0:
        return np.zeros(1)
    w_full, w_last = lag_weight_pair(K - i0, 1.0 + alpha)
    prof = _one_norm_kernel(np.ascontiguousarray(y), i0, w_full, w_last)
    return prof[i0:] * dt ** (-alpha)


def one_norm_profile(X: SamplePath, alpha: float, regularity: float | None = None) -> np.ndarray:
    """``||X||_{1,t}`` at every grid time ``t >= 0``.

    ``regularity`` is the declared ``min(theta, gamma)`` of the path family; an
    ``alpha`` at or above it is rejected.
    """
    _check_alpha(alpha, regularity)
    return _one_norm_values(X.values, _zero_index(X), X.grid.dt, alpha)


def _head_index(X: SamplePath, t: float) -> tuple[int, int]:
    k = X.grid.index_of(t)
    i0 = _zero_index(X)
    if k < i0:
        raise ValueError(f"t={t} must be non-negative")
    return k, i0


def one_norm_history(X: SamplePath, t: float, alpha: float, regularity: float | None = None) -> float:
    """``int_0^t ||X_{.+t-s} - X_.||_{inf,s} (t-s)**(-1-alpha) ds``."""
    _check_alpha(alpha, regularity)
    k, i0 = _head_index(X, t)
    return float(_one_norm_values(X.values[: k + 1], i0, X.grid.dt, alpha)[-1])


def solution_norm(X: SamplePath, t: float, alpha: float, regularity: float | None = None) -> NormReport:
    """``||X||_t = ||X||_{inf,t} + ||X||_{1,t}`` with profiles on ``[0, t]``."""
    _check_alpha(alpha, regularity)
    k, i0 = _head_index(X, t)
    y = X.values[: k + 1]
    sup = np.maximum.accumulate(np.linalg.norm(y, axis=1))[i0:]
    one = _one_norm_values(y, i0, X.grid.dt, alpha)
    return NormReport(
        sup_norm=float(sup[-1]),
        one_norm=float(one[-1]),
        total=float(sup[-1] + one[-1]),
        t=np.array(X.grid.times[i0 : k + 1]),
        sup_profile=sup,
        one_profile=one,
    )
