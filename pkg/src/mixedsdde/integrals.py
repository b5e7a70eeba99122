"""Pathwise integrals: the fractional (Zähle) Lebesgue-Stieltjes integral,
left-point Itô sums and a Riemann-Stieltjes oracle.

The fractional derivatives are evaluated at interior grid points with the
product-trapezoid rule, exact for piecewise-linear data. The integral itself
uses the real-valued form

    int_a^b f dg = -int_a^b (D^alpha_{a+} f)(x) (D^{1-alpha}_{b-} g_{b-})(x) dx

where the right derivative is the real profile without its unimodular
factor; the minus sign is what remains of ``exp(i pi alpha) * (-1)**(1-alpha)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from ._quadrature import cell_weights, node_weights
from .grid import SamplePath
from .norms import _abs_lag_kernel, alpha_norm, lag_weight_pair


class RegularityWarning(UserWarning):
    """Measured path regularity does not support the requested integral."""


@dataclass(frozen=True, eq=False)
class FracDerivativeProfile:
    """Fractional derivative values at the interior grid points ``x``."""

    alpha: float
    side: str
    x: np.ndarray
    values: np.ndarray


def _segment(path: SamplePath, a, b) -> tuple[np.ndarray, np.ndarray]:
    grid = path.grid
    ia = 0 if a is None else grid.index_of(a)
    ib = grid.n_steps if b is None else grid.index_of(b)
    if ib - ia < 2:
        raise ValueError(f"interval [{a}, {b}] needs at least one interior grid point")
    return path.values[ia : ib + 1], grid.times[ia : ib + 1]


def _lag_sums(y: np.ndarray, kappa: float) -> np.ndarray:
    """``S[k] = sum_{m=1}^{k} w(m; k) (y[k] - y[k-m])`` for every node ``k``."""
    K = y.shape[0] - 1
    w_full, w_last = lag_weight_pair(K, kappa)
    cum = np.cumsum(w_full)
    conv = fftconvolve(y, w_full[:, None], axes=0)[: K + 1]
    S = y * cum[:, None] - conv
    # the last node of each sum carries B[k-1] instead of A[k] + B[k-1]
    S -= (w_full - w_last)[:, None] * (y - y[0])
    S[0] = 0.0
    return S


def frac_derivative_left(f: SamplePath, alpha: float, a=None, b=None) -> FracDerivativeProfile:
    """``D^alpha_{a+} f`` at interior grid points of ``[a, b]``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    y, t = _segment(f, a, b)
    dt = f.grid.dt
    K = y.shape[0] - 1
    k = np.arange(1, K, dtype=float)[:, None]
    S = _lag_sums(y - y[0], 1.0 + alpha)[1:K]
    vals = (y[1:K] / (k * dt) ** alpha + alpha * dt ** (-alpha) * S) / math.gamma(1.0 - alpha)
    return FracDerivativeProfile(alpha, "left", np.array(t[1:K]), vals)


def frac_derivative_right(g: SamplePath, alpha: float, a=None, b=None) -> FracDerivativeProfile:
    """Real profile of ``D^{1-alpha}_{b-} g_{b-}`` at interior grid points.

    ``g_{b-} = g - g(b)``; the unimodular constant is omitted.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    y, t = _segment(g, a, b)
    dt = g.grid.dt
    K = y.shape[0] - 1
    # shift by g(b) first so constants give exact zeros
    rev = (y - y[K])[::-1]
    S = _lag_sums(rev, 2.0 - alpha)[::-1][1:K]
    gb = y[1:K] - y[K]
    lag_to_b = np.arange(K - 1, 0, -1, dtype=float)[:, None]
    vals = (gb / (lag_to_b * dt) ** (1.0 - alpha) + (1.0 - alpha) * dt ** (alpha - 1.0) * S) / math.gamma(alpha)
    return FracDerivativeProfile(alpha, "right", np.array(t[1:K]), vals)


def estimate_holder_exponent(path: SamplePath, levels: int | None = None) -> float:
    """Slope of log RMS increment against log lag over dyadic lags.

    Returns ``inf`` for a constant path.
    """
    y = path.values
    n = y.shape[0] - 1
    # long lags have few effectively independent increments
    top = max(int(math.log2(n)) - 6, 3) if levels is None else levels
    lags, osc = [], []
    for e in range(top):
        h = 2**e
        if h >= n:
            break
        inc = np.sqrt(np.mean(np.sum((y[h:] - y[:-h]) ** 2, axis=1)))
        lags.append(h * path.grid.dt)
        osc.append(inc)
    osc = np.array(osc)
    keep = osc > 0
    if keep.sum() < 2:
        return math.inf
    slope, _ = np.polyfit(np.log(np.array(lags)[keep]), np.log(osc[keep]), 1)
    return float(slope)


def _check_regularity(f: SamplePath, g: SamplePath, alpha: float):
    ef = estimate_holder_exponent(f)
    eg = estimate_holder_exponent(g)
    if ef <= alpha or eg <= 1.0 - alpha:
        warnings.warn(
            f"measured Hölder exponents ({ef:.3f}, {eg:.3f}) do not clear "
            f"(alpha, 1 - alpha) = ({alpha}, {1 - alpha})",
            RegularityWarning,
            stacklevel=3,
        )


def _outer_integral(q: np.ndarray, dt: float, alpha: float) -> np.ndarray:
    """``int_a^b (x-a)**(-alpha) q(x) dx`` from interior values of ``q``.

    Endpoint values are closed with the adjacent interior value.
    """
    full = np.concatenate([q[:1], q, q[-1:]], axis=0)
    K = full.shape[0] - 1
    w = node_weights(K, alpha)
    return np.tensordot(w, full, axes=(0, 0)) * dt ** (1.0 - alpha)


def gls_integral(f: SamplePath, g: SamplePath, alpha: float, a=None, b=None, check: bool = True):
    """Fractional Lebesgue-Stieltjes integral ``int_a^b f dg``.

    Scalar paths give a float; otherwise entry ``[i, j]`` is ``int f_i dg_j``.
    """
    if f.grid != g.grid:
        raise ValueError("integrand and integrator must share a grid")
    if check:
        _check_regularity(f, g, alpha)
    left = frac_derivative_left(f, alpha, a, b)
    right = frac_derivative_right(g, alpha, a, b)
    for prof in (left, right):
        bad = ~np.isfinite(prof.values)
        if bad.any():
            i = int(np.argwhere(bad)[0, 0])
            raise FloatingPointError(f"non-finite {prof.side} derivative at x={prof.x[i]}")
    dt = f.grid.dt
    a0 = left.x[0] - dt
    weight = ((left.x - a0) ** alpha)[:, None, None]
    q = weight * left.values[:, :, None] * right.values[:, None, :]
    out = -_outer_integral(q, dt, alpha)
    if out.shape == (1, 1):
        return float(out[0, 0])
    return out


def riemann_stieltjes_oracle(f: SamplePath, g: SamplePath, partition=None):
    """Left-point sum ``sum f(t_k) (g(t_{k+1}) - g(t_k))`` over grid indices."""
    if f.grid != g.grid:
        raise ValueError("integrand and integrator must share a grid")
    idx = np.arange(f.grid.n_steps + 1) if partition is None else np.asarray(partition, dtype=int)
    fv = f.values[idx[:-1]]
    dg = np.diff(g.values[idx], axis=0)
    out = fv.T @ dg
    if out.shape == (1, 1):
        return float(out[0, 0])
    return out


def ito_integral(integrand, W: SamplePath) -> SamplePath:
    """Running left-point sums ``sum_{j<k} H(t_j) (W(t_{j+1}) - W(t_j))``.

    ``integrand`` is an array ``(n+1, d, m)`` or a path with ``m`` components
    (a row vector, giving a scalar integral).
    """
    if isinstance(integrand, SamplePath):
        if integrand.grid != W.grid:
            raise ValueError("integrand and Wiener path must share a grid")
        H = integrand.values[:, None, :]
    else:
        H = np.asarray(integrand, dtype=float)
        if H.ndim == 2:
            H = H[:, None, :]
    if H.ndim != 3 or H.shape[0] != W.grid.n_steps + 1 or H.shape[2] != W.dims:
        raise ValueError(f"integrand shape {H.shape} does not match Wiener path dims {W.dims}")
    dW = np.diff(W.values, axis=0)
    inc = np.einsum("kij,kj->ki", H[:-1], dW)
    values = np.zeros((W.grid.n_steps + 1, H.shape[1]))
    np.cumsum(inc, axis=0, out=values[1:])
    return SamplePath(W.grid, values, {"kind": "ito-integral"})


def _integrability_bracket(f: SamplePath, alpha: float, a=None, b=None) -> float:
    # int_a^b ( |f(s)| (s-a)**-alpha + int_a^s |f(s)-f(u)| (s-u)**(-1-alpha) du ) ds
    y, _ = _segment(f, a, b)
    dt = f.grid.dt
    K = y.shape[0] - 1
    w_full, w_last = lag_weight_pair(K, 1.0 + alpha)
    inner = _abs_lag_kernel(np.ascontiguousarray(y), w_full, w_last) * dt ** (-alpha)
    k = np.arange(1, K, dtype=float)
    # fold the singular first term into the outer weight (s-a)**-alpha
    q = np.linalg.norm(y[1:K], axis=1) + (k * dt) ** alpha * inner[1:K]
    return float(_outer_integral(q, dt, alpha))


def estimate_2_2_ratio(f: SamplePath, g: SamplePath, alpha: float, a=None, b=None) -> float:
    """``|int f dg| / (||g||_alpha * bracket(f))``; ``0/0`` is taken as 0."""
    num = gls_integral(f, g, alpha, a, b, check=False)
    num = float(np.abs(num).max()) if np.ndim(num) else abs(num)
    den = alpha_norm(g, alpha, a, b) * _integrability_bracket(f, alpha, a, b)
    if den == 0.0:
        if num == 0.0:
            return 0.0
        raise ZeroDivisionError("zero denominator with non-zero integral")
    return num / den
