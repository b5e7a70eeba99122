import numpy as np
import pytest

from conftest import random_walk
from mixedsdde.grid import SamplePath, TimeGrid
from mixedsdde.norms import (
    NormConfig,
    alpha_norm,
    alpha_norm_profile,
    holder_seminorm,
    one_norm_history,
    one_norm_profile,
    solution_norm,
    sup_norm_history,
    sup_norm_profile,
)


def brute_holder(y, dt, lam):
    best = 0.0
    for u in range(len(y)):
        for v in range(u + 1, len(y)):
            best = max(best, abs(y[v] - y[u]) / ((v - u) * dt) ** lam)
    return best


def linear_alpha_norm(alpha, length=1.0):
    # |dg|/(v-u)^(1-a) = (v-u)^a and int_u^v (z-u)^(a-1) dz = (v-u)^a / a
    return length**alpha * (1.0 + 1.0 / alpha)


class TestHolderSeminorm:
    def test_constant_is_zero(self, unit_grid):
        assert holder_seminorm(SamplePath.constant(unit_grid, 4.0), 0.5) == 0.0

    def test_linear_lipschitz(self, linear_path):
        assert holder_seminorm(linear_path, 1.0) == pytest.approx(1.0, rel=1e-12)

    def test_linear_fractional_exponent(self, linear_path):
        assert holder_seminorm(linear_path, 0.4) == pytest.approx(1.0, rel=1e-12)

    def test_matches_brute_force(self):
        g = TimeGrid(0.0, 1.0, 64)
        p = random_walk(g, 1)
        assert holder_seminorm(p, 0.3) == pytest.approx(brute_holder(p.scalar(), g.dt, 0.3), rel=1e-12)

    def test_sub_interval(self, linear_path):
        assert holder_seminorm(linear_path, 0.5, 0.0, 0.25) == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("lam", [0.0, 1.2])
    def test_rejects_exponent(self, linear_path, lam):
        with pytest.raises(ValueError):
            holder_seminorm(linear_path, lam)

    def test_rejects_empty_interval(self, linear_path):
        with pytest.raises(ValueError):
            holder_seminorm(linear_path, 0.5, 0.5, 0.5)


class TestAlphaNorm:
    def test_constant_is_zero(self, unit_grid):
        assert alpha_norm(SamplePath.constant(unit_grid, 2.0), 0.25) == 0.0

    @pytest.mark.parametrize("alpha", [0.1, 0.25, 0.4])
    def test_linear_closed_form(self, linear_path, alpha):
        assert alpha_norm(linear_path, alpha) == pytest.approx(linear_alpha_norm(alpha), abs=1e-3)

    def test_homogeneity(self):
        p = random_walk(TimeGrid(0.0, 1.0, 256), 4)
        assert alpha_norm(-3.0 * p, 0.3) == pytest.approx(3.0 * alpha_norm(p, 0.3), rel=1e-12)

    def test_dominates_holder_seminorm(self):
        p = random_walk(TimeGrid(0.0, 1.0, 256), 5)
        assert alpha_norm(p, 0.3) >= holder_seminorm(p, 0.7)

    def test_profile_is_running_norm(self):
        g = TimeGrid(0.0, 1.0, 128)
        p = random_walk(g, 6)
        prof = alpha_norm_profile(p, 0.3)
        assert prof[0] == 0.0
        for k in (1, 17, 64, 128):
            assert prof[k] == pytest.approx(alpha_norm(p, 0.3, 0.0, g.times[k]), rel=1e-12)
        assert np.all(np.diff(prof) >= 0)

    def test_refinement_stability(self):
        f = lambda t: np.sin(2 * np.pi * t)
        a = alpha_norm(SamplePath.from_function(TimeGrid(0, 1, 1024), f), 0.3)
        b = alpha_norm(SamplePath.from_function(TimeGrid(0, 1, 2048), f), 0.3)
        assert abs(a - b) / b < 0.05


class TestSupNorm:
    def test_constant(self):
        g = TimeGrid(-1.0, 2.0, 30)
        X = SamplePath.constant(g, 5.0)
        assert sup_norm_history(X, 1.0) == 5.0
        assert np.all(sup_norm_profile(X) == 5.0)

    def test_history_dominates(self):
        g = TimeGrid(-1.0, 2.0, 300)
        X = SamplePath.from_function(g, lambda t: np.where(t < 0, -2 * t, 0.0))
        for t in (0.0, 0.5, 2.0):
            assert sup_norm_history(X, t) == pytest.approx(2.0)

    def test_brute_force_scan(self):
        g = TimeGrid(-0.5, 1.0, 150)
        X = random_walk(g, 7, dims=2)
        k = g.index_of(0.7)
        assert sup_norm_history(X, 0.7) == np.linalg.norm(X.values[: k + 1], axis=1).max()

    def test_rejects_negative_time(self):
        X = SamplePath.constant(TimeGrid(-1.0, 1.0, 20), 1.0)
        with pytest.raises(ValueError):
            sup_norm_history(X, -0.5)


class TestOneNorm:
    def test_constant_is_zero(self):
        X = SamplePath.constant(TimeGrid(-0.5, 1.0, 300), 3.0)
        assert one_norm_history(X, 1.0, 0.25) == 0.0

    def test_linear_closed_form(self):
        X = SamplePath.from_function(TimeGrid(-0.25, 1.0, 5 * 2**10), lambda t: t)
        assert one_norm_history(X, 1.0, 0.25) == pytest.approx(4.0 / 3.0, abs=1e-2)

    @pytest.mark.parametrize("t", [0.25, 0.5, 0.75])
    def test_linear_at_intermediate_times(self, t):
        X = SamplePath.from_function(TimeGrid(-0.25, 1.0, 1280), lambda s: s)
        assert one_norm_history(X, t, 0.3) == pytest.approx(t**0.7 / 0.7, rel=1e-9)

    def test_profile_matches_pointwise(self):
        X = random_walk(TimeGrid(-0.25, 1.0, 160), 8)
        prof = one_norm_profile(X, 0.3)
        for t in (0.0, 0.25, 0.5, 1.0):
            k = X.grid.index_of(t) - X.grid.index_of(0.0)
            assert prof[k] == pytest.approx(one_norm_history(X, t, 0.3), rel=1e-12)

    def test_refinement_on_fbm(self, fbm_14):
        # coarse path is the fine path subsampled; fBm is zero on the history
        def extend(values, n):
            g = TimeGrid(-0.25, 1.0, n + n // 4)
            return SamplePath(g, np.concatenate([np.zeros((n // 4, 1)), values]))

        a = one_norm_history(extend(fbm_14.values[::2], 2**13), 1.0, 0.25)
        b = one_norm_history(extend(fbm_14.values, 2**14), 1.0, 0.25)
        assert abs(a - b) / b < 0.05

    def test_rejects_alpha_above_regularity(self):
        X = SamplePath.constant(TimeGrid(-1, 1, 20), 1.0)
        with pytest.raises(ValueError, match="regularity"):
            one_norm_history(X, 1.0, 0.4, regularity=0.35)
        with pytest.raises(ValueError):
            one_norm_history(X, 1.0, 0.6)


class TestSolutionNorm:
    def test_constant_total(self):
        rep = solution_norm(SamplePath.constant(TimeGrid(-1.0, 1.0, 40), -2.5), 1.0, 0.3)
        assert rep.total == 2.5 and rep.one_norm == 0.0

    def test_total_is_exact_sum_and_profiles_monotone(self):
        X = random_walk(TimeGrid(-0.25, 1.0, 320), 9, dims=2)
        rep = solution_norm(X, 1.0, 0.3)
        assert rep.total == rep.sup_norm + rep.one_norm
        assert np.all(np.diff(rep.sup_profile) >= 0)
        assert np.all(np.diff(rep.one_profile) >= 0)
        assert np.array_equal(rep.total_profile, rep.sup_profile + rep.one_profile)

    def test_csv(self, tmp_path):
        X = random_walk(TimeGrid(-0.25, 1.0, 40), 10)
        rep = solution_norm(X, 1.0, 0.3)
        rep.to_csv(tmp_path / "n.csv")
        rows = (tmp_path / "n.csv").read_text().splitlines()
        assert rows[0] == "t,sup,one,total"
        assert len(rows) == 1 + 33


class TestNormConfig:
    def test_valid(self):
        NormConfig(0.35, gamma=0.7, theta=1.0)

    @pytest.mark.parametrize("kw", [dict(alpha=0.6), dict(alpha=0.2, gamma=0.7), dict(alpha=0.4, theta=0.3),
                                    dict(alpha=0.3, rule="simpson")])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            NormConfig(**kw)
