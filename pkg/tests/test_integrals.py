import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import random_walk
from mixedsdde.grid import SamplePath, TimeGrid
from mixedsdde.integrals import (
    RegularityWarning,
    estimate_2_2_ratio,
    estimate_holder_exponent,
    frac_derivative_left,
    frac_derivative_right,
    gls_integral,
    ito_integral,
    riemann_stieltjes_oracle,
)
from mixedsdde.paths import FbmParams, generate_fbm, generate_wiener

G12 = TimeGrid(0.0, 1.0, 2**12)


def smooth(grid, k=1.0):
    return SamplePath.from_function(grid, lambda t: np.cos(2 * k * t) + 0.5 * t)


class TestLeftDerivative:
    def test_constant_closed_form(self):
        alpha = 0.3
        prof = frac_derivative_left(SamplePath.constant(G12, 2.0), alpha)
        for k in (10, 1000, 4000):
            x = prof.x[k]
            assert prof.values[k, 0] == pytest.approx(2.0 / math.gamma(1 - alpha) * x**-alpha, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.2, 0.45])
    def test_power_rule(self, alpha):
        f = SamplePath.from_function(G12, lambda t: t**alpha)
        vals = frac_derivative_left(f, alpha).values[:, 0]
        # interior points away from the kink of t**alpha at 0
        assert np.allclose(vals[200:], math.gamma(1 + alpha), rtol=2e-3)

    def test_matches_adaptive_quadrature(self):
        alpha = 0.35
        g = TimeGrid(0.0, 1.0, 2048)
        fn = lambda t: np.sin(3 * t) + 1
        prof = frac_derivative_left(SamplePath.from_function(g, fn), alpha)
        x = prof.x[1500]
        inner = quad(lambda u: (fn(x) - fn(u)) / (x - u) ** (1 + alpha), 0, x, limit=200)[0]
        ref = (fn(x) / x**alpha + alpha * inner) / math.gamma(1 - alpha)
        assert prof.values[1500, 0] == pytest.approx(ref, rel=1e-4)

    def test_linearity(self):
        f, g = smooth(G12), random_walk(G12, 1)
        lhs = frac_derivative_left(f + g, 0.3).values
        rhs = frac_derivative_left(f, 0.3).values + frac_derivative_left(g, 0.3).values
        assert np.max(np.abs(lhs - rhs)) < 1e-12 * np.max(np.abs(lhs)) + 1e-12

    def test_excludes_left_endpoint(self):
        prof = frac_derivative_left(smooth(G12), 0.3)
        assert prof.x[0] > 0 and prof.side == "left"
        with pytest.raises(ValueError):
            frac_derivative_left(smooth(G12), 1.2)


class TestRightDerivative:
    def test_constant_is_zero(self):
        assert np.all(frac_derivative_right(SamplePath.constant(G12, 4.0), 0.3).values == 0.0)

    @pytest.mark.parametrize("alpha", [0.25, 0.4])
    def test_reflected_power_rule(self, alpha):
        # g(x) = b - x: g_{b-}(x) = (b - x), D^{1-a}_{b-} (b-x) = (b-x)^a / Gamma(1+a)
        g = SamplePath.from_function(G12, lambda t: 1.0 - t)
        prof = frac_derivative_right(g, alpha)
        exact = (1.0 - prof.x) ** alpha / math.gamma(1 + alpha)
        assert np.allclose(prof.values[:, 0], exact, rtol=1e-9, atol=1e-12)

    def test_linearity(self):
        f, g = smooth(G12), random_walk(G12, 2)
        lhs = frac_derivative_right(f + g, 0.3).values
        rhs = frac_derivative_right(f, 0.3).values + frac_derivative_right(g, 0.3).values
        assert np.max(np.abs(lhs - rhs)) < 1e-11

    def test_excludes_right_endpoint(self):
        prof = frac_derivative_right(smooth(G12), 0.3)
        assert prof.x[-1] < 1.0 and prof.side == "right"


class TestGlsIntegral:
    def test_against_identity(self):
        one = SamplePath.constant(G12, 1.0)
        x = SamplePath.from_function(G12, lambda t: t)
        assert gls_integral(one, x, 0.3) == pytest.approx(1.0, abs=1e-3)

    def test_ordinary_integral(self):
        f = SamplePath.from_function(G12, lambda t: np.exp(t))
        x = SamplePath.from_function(G12, lambda t: t)
        assert gls_integral(f, x, 0.3) == pytest.approx(math.e - 1, abs=1e-3)

    @pytest.mark.parametrize("alpha", [0.1, 0.25, 0.4])
    def test_chain_rule(self, alpha):
        s = SamplePath.from_function(G12, lambda t: np.sin(3 * t) + 0.3)
        y = s.scalar()
        assert gls_integral(s, s, alpha) == pytest.approx((y[-1] ** 2 - y[0] ** 2) / 2, abs=1e-3)

    def test_fbm_against_riemann_stieltjes(self, fbm_14):
        f = smooth(fbm_14.grid)
        v = gls_integral(f, fbm_14, 0.35)
        rs = riemann_stieltjes_oracle(f, fbm_14)
        assert abs(v - rs) / abs(rs) < 1e-2

    def test_error_shrinks_with_refinement(self, fbm_14):
        errs = []
        for step in (4, 2, 1):
            g = TimeGrid(0.0, 1.0, 2**14 // step)
            Z = SamplePath(g, fbm_14.values[::step])
            f = smooth(g)
            exact_ish = riemann_stieltjes_oracle(smooth(fbm_14.grid), fbm_14)
            errs.append(abs(gls_integral(f, Z, 0.35) - exact_ish))
        assert errs[2] < errs[1] < errs[0]

    def test_additivity(self, fbm_14):
        f = smooth(fbm_14.grid)
        whole = gls_integral(f, fbm_14, 0.35)
        parts = gls_integral(f, fbm_14, 0.35, 0.0, 0.5) + gls_integral(f, fbm_14, 0.35, 0.5, 1.0)
        assert abs(whole - parts) < 1e-3

    def test_bilinearity(self):
        f1, f2 = smooth(G12), smooth(G12, 2.0)
        g1 = SamplePath.from_function(G12, lambda t: np.sin(t))
        g2 = SamplePath.from_function(G12, lambda t: t**2)
        lhs = gls_integral(2 * f1 + f2, g1 - 3 * g2, 0.3, check=False)
        rhs = (2 * gls_integral(f1, g1, 0.3) - 6 * gls_integral(f1, g2, 0.3)
               + gls_integral(f2, g1, 0.3) - 3 * gls_integral(f2, g2, 0.3))
        assert abs(lhs - rhs) < 1e-12

    def test_matrix_valued(self):
        F = SamplePath(G12, np.column_stack([np.ones(G12.n_steps + 1), G12.times]))
        g = SamplePath(G12, np.column_stack([G12.times, G12.times**2]))
        out = gls_integral(F, g, 0.3)
        assert out.shape == (2, 2)
        assert np.allclose(out, [[1.0, 1.0], [0.5, 2.0 / 3.0]], atol=2e-3)

    def test_warns_on_rough_integrator(self):
        g = TimeGrid(0.0, 1.0, 2**12)
        W = generate_wiener(g, 1, 3)
        with pytest.warns(RegularityWarning):
            gls_integral(smooth(g), W, 0.3)

    def test_no_warning_on_fbm(self, fbm_14):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            gls_integral(smooth(fbm_14.grid), fbm_14, 0.35)

    def test_grid_mismatch(self):
        with pytest.raises(ValueError):
            gls_integral(smooth(G12), smooth(TimeGrid(0, 1, 100)), 0.3)


class TestHolderEstimate:
    def test_fbm_exponent(self, fbm_14):
        assert estimate_holder_exponent(fbm_14) == pytest.approx(0.75, abs=0.05)

    def test_constant(self):
        assert estimate_holder_exponent(SamplePath.constant(G12, 1.0)) == math.inf

    def test_linear(self):
        assert estimate_holder_exponent(SamplePath.from_function(G12, lambda t: t)) == pytest.approx(1.0)


class TestOracleAndIto:
    def test_rs_partition(self):
        f = SamplePath.from_function(G12, lambda t: t)
        g = SamplePath.from_function(G12, lambda t: t)
        coarse = riemann_stieltjes_oracle(f, g, np.arange(0, 4097, 1024))
        assert coarse == pytest.approx(0.375)

    def test_ito_zero_and_one(self):
        W = generate_wiener(G12, 1, 4)
        assert np.all(ito_integral(SamplePath.constant(G12, 0.0), W).values == 0.0)
        assert np.allclose(ito_integral(SamplePath.constant(G12, 1.0), W).values, W.values, atol=1e-12)

    def test_ito_isometry(self):
        g = TimeGrid(0.0, 1.0, 64)
        finals = np.array([ito_integral(SamplePath.constant(g, 1.0), generate_wiener(g, 1, k)).values[-1, 0]
                           for k in range(5000)])
        sq = finals**2
        assert abs(sq.mean() - 1.0) < 3 * sq.std(ddof=1) / np.sqrt(sq.size)

    def test_ito_matrix_integrand(self):
        W = generate_wiener(G12, 2, 5)
        H = np.zeros((G12.n_steps + 1, 3, 2))
        H[:, 0, 0] = 1.0
        H[:, 2, 1] = 2.0
        out = ito_integral(H, W).values
        assert np.allclose(out[:, 0], W.values[:, 0]) and np.allclose(out[:, 2], 2 * W.values[:, 1])

    def test_ito_dimension_mismatch(self):
        W = generate_wiener(G12, 2, 5)
        with pytest.raises(ValueError):
            ito_integral(SamplePath.constant(G12, 1.0), W)


class TestEstimateRatio:
    def test_zero_integrand(self, fbm_14):
        assert estimate_2_2_ratio(SamplePath.constant(fbm_14.grid, 0.0), fbm_14, 0.35) == 0.0

    def test_constant_integrator(self):
        assert estimate_2_2_ratio(smooth(G12), SamplePath.constant(G12, 3.0), 0.3) == 0.0

    def test_ratio_family_stable_across_grids(self):
        # 100 random (smooth f, fBm g) pairs; the constant is existential so only its stability is checked
        rng = np.random.default_rng(17)
        params = [(rng.uniform(0.5, 4), rng.uniform(-1, 1), rng.uniform(0, 2 * np.pi)) for _ in range(100)]
        fine = TimeGrid(0.0, 1.0, 2**14)
        drivers = [generate_fbm(fine, FbmParams(0.75, seed=1000 + i)).values for i in range(100)]
        maxima = []
        for step in (4, 2, 1):
            g = TimeGrid(0.0, 1.0, 2**14 // step)
            best = 0.0
            for (k, c, ph), z in zip(params, drivers):
                f = SamplePath.from_function(g, lambda t: np.sin(k * t + ph) + c)
                best = max(best, estimate_2_2_ratio(f, SamplePath(g, z[::step]), 0.35))
            maxima.append(best)
        assert all(np.isfinite(maxima))
        assert max(maxima) / min(maxima) < 2.0
