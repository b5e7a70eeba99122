"""Product-trapezoid weights for power-law kernels on a uniform lag grid.

Every singular integral in the package has the form

    int_0^{M h} phi(sigma) * sigma**(-kappa) dsigma

with ``phi`` known at the lag nodes ``j*h`` and interpolated linearly between
them (the same rule the paths use off-grid). On each cell the kernel is
integrated exactly against both hat functions, so the rule is exact whenever
``phi`` is piecewise linear on the grid. ``phi(0) = 0`` is assumed whenever
``kappa >= 1``; the first-cell weight of node 0 is then infinite and is
stored as 0.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_GL_X = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


@lru_cache(maxsize=64)
def _cell_weights_cached(m: int, kappa: float) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(m, dtype=float)
    A = np.empty(m)
    B = np.empty(m)
    if m == 0:
        return A, B
    # first cell: closed form (integrand singular at 0)
    B[0] = 1.0 / (2.0 - kappa)
    A[0] = 1.0 / (1.0 - kappa) - B[0] if kappa < 1.0 else 0.0
    if m > 1:
        # cells away from the singularity: 16-point Gauss-Legendre is exact to
        # rounding because the nearest singularity sits a full cell away
        s = j[1:, None] + _GL_X[None, :]
        kern = s ** (-kappa)
        A[1:] = kern @ (_GL_W * (1.0 - _GL_X))
        B[1:] = kern @ (_GL_W * _GL_X)
    A.setflags(write=False)
    B.setflags(write=False)
    return A, B


def cell_weights(m: int, kappa: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell hat-function moments for cells ``[j, j+1]``, ``j = 0..m-1``.

    ``A[j] = int_j^{j+1} (j+1-s) s**-kappa ds`` and
    ``B[j] = int_j^{j+1} (s-j) s**-kappa ds`` (unit spacing).
    """
    if not kappa < 2.0:
        raise ValueError(f"kernel exponent must be < 2, got {kappa}")
    return _cell_weights_cached(int(m), float(kappa))


def node_weights(M: int, kappa: float) -> np.ndarray:
    """Weights ``w_0..w_M`` for the integral over ``[0, M]`` at unit spacing."""
    A, B = cell_weights(M, kappa)
    w = np.zeros(M + 1)
    w[:-1] += A
    w[1:] += B
    return w


def interior_weights(M: int, kappa: float) -> np.ndarray:
    """Weights ``A[m] + B[m-1]`` a lag node gets when it is not the last node.

    Index 0 holds ``A[0]``. Length ``M + 1``; entry ``M`` uses cell ``M``, so
    ``cell_weights(M + 1, kappa)`` is consulted.
    """
    A, B = cell_weights(M + 1, kappa)
    w = A.copy()
    w[1:] += B[:-1]
    return w
