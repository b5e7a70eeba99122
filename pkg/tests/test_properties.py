"""Randomised invariants: norm axioms, monotone profiles, seeded determinism, causality."""

import numpy as np
from hypothesis import given, settings, strategies as st

from mixedsdde.coefficients import build_coefficients
from mixedsdde.grid import SamplePath, TimeGrid
from mixedsdde.norms import alpha_norm, one_norm_history, solution_norm, sup_norm_history
from mixedsdde.paths import FbmParams, InitialSegment, generate_fbm, generate_wiener
from mixedsdde.solver import solve_paths

G = TimeGrid(0.0, 1.0, 128)
HIST = TimeGrid(-0.25, 1.0, 160)
SLACK = 1e-12

seeds = st.integers(0, 2**32 - 1)
alphas = st.floats(0.05, 0.45)
scales = st.floats(-50.0, 50.0, allow_nan=False).filter(lambda c: abs(c) > 1e-3)


def walk(grid, seed):
    rng = np.random.default_rng(seed)
    y = np.cumsum(rng.standard_normal((grid.n_steps + 1, 1)), axis=0) * np.sqrt(grid.dt)
    return SamplePath(grid, y)


def close_le(a, b):
    return a <= b + SLACK * max(1.0, abs(b))


@settings(max_examples=40, deadline=None)
@given(seeds, alphas, scales)
def test_alpha_norm_homogeneous(seed, alpha, c):
    g = walk(G, seed)
    scaled = SamplePath(G, c * g.values)
    assert np.isclose(alpha_norm(scaled, alpha), abs(c) * alpha_norm(g, alpha), rtol=SLACK, atol=0)


@settings(max_examples=40, deadline=None)
@given(seeds, seeds, alphas)
def test_alpha_norm_triangle(s1, s2, alpha):
    f, g = walk(G, s1), walk(G, s2)
    assert close_le(alpha_norm(f + g, alpha), alpha_norm(f, alpha) + alpha_norm(g, alpha))


@settings(max_examples=30, deadline=None)
@given(seeds, seeds, alphas)
def test_solution_norm_triangle_and_homogeneity(s1, s2, alpha):
    X, Y = walk(HIST, s1), walk(HIST, s2)
    nx = solution_norm(X, 1.0, alpha).total
    ny = solution_norm(Y, 1.0, alpha).total
    assert close_le(solution_norm(X + Y, 1.0, alpha).total, nx + ny)
    twice = SamplePath(HIST, -2.0 * X.values)
    assert np.isclose(solution_norm(twice, 1.0, alpha).total, 2.0 * nx, rtol=SLACK, atol=0)


@settings(max_examples=30, deadline=None)
@given(seeds, alphas)
def test_profiles_monotone(seed, alpha):
    X = walk(HIST, seed)
    ts = HIST.times[HIST.index_of(0.0) :: 8]
    sup = [sup_norm_history(X, t) for t in ts]
    one = [one_norm_history(X, t, alpha) for t in ts]
    assert all(b >= a - SLACK for a, b in zip(sup, sup[1:]))
    assert all(b >= a - SLACK for a, b in zip(one, one[1:]))


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(0.55, 0.95))
def test_generators_deterministic(seed, H):
    a = generate_fbm(G, FbmParams(H, 1, seed))
    b = generate_fbm(G, FbmParams(H, 1, seed))
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(generate_wiener(G, 2, seed).values, generate_wiener(G, 2, seed).values)
    assert a.values[0, 0] == 0.0


def _solve(W, Z, x0=1.0):
    co = build_coefficients("bounded_diffusion")
    eta = InitialSegment.constant(x0, 0.25, 32)
    return solve_paths(co, eta, G, W, Z)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, G.n_steps - 1), st.floats(0.1, 5.0))
def test_solution_is_causal(seed, k, bump):
    rng = np.random.default_rng(seed)
    W = np.cumsum(rng.standard_normal((G.n_steps + 1, 1)), axis=0) * np.sqrt(G.dt)
    Z = generate_fbm(G, FbmParams(0.7, 1, seed)).values
    W[0] = 0.0
    base = _solve(W, Z)
    W2, Z2 = W.copy(), Z.copy()
    W2[k + 1 :] += bump
    Z2[k + 1 :] -= bump
    moved = _solve(W2, Z2)
    nh = 32
    # driver changes after t_k cannot reach X(t_j) for j <= k
    assert np.array_equal(base[: nh + k + 1], moved[: nh + k + 1])
    assert np.all(base[:nh + 1] == 1.0)


@settings(max_examples=15, deadline=None)
@given(seeds, st.floats(-3.0, 3.0))
def test_history_reproduced_exactly(seed, x0):
    W = generate_wiener(G, 1, seed).values
    Z = generate_fbm(G, FbmParams(0.7, 1, seed)).values
    X = _solve(W, Z, x0)
    assert np.array_equal(X[:33, 0], np.full(33, x0))
    assert np.all(np.isfinite(X))
