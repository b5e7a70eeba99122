import numpy as np
import pytest
from scipy.integrate import quad

from mixedsdde._quadrature import cell_weights, node_weights


@pytest.mark.parametrize("kappa", [0.25, 0.7, 1.3, 1.75])
def test_cell_moments_match_adaptive_quadrature(kappa):
    A, B = cell_weights(6, kappa)
    for j in range(6):
        if j == 0 and kappa >= 1:
            assert A[0] == 0.0
        else:
            a_ref = quad(lambda s: (j + 1 - s) * s**-kappa, j, j + 1, limit=200)[0]
            assert A[j] == pytest.approx(a_ref, rel=1e-10)
        if kappa < 2:
            b_ref = quad(lambda s: (s - j) * s**-kappa, j, j + 1, limit=200)[0]
            assert B[j] == pytest.approx(b_ref, rel=1e-10)


def test_weights_are_read_only_and_cached():
    A, _ = cell_weights(4, 0.5)
    assert cell_weights(4, 0.5)[0] is A
    with pytest.raises(ValueError):
        A[0] = 1.0


def test_rejects_nonintegrable_exponent():
    with pytest.raises(ValueError):
        cell_weights(4, 2.0)


@pytest.mark.parametrize("kappa", [0.2, 0.45])
def test_rule_is_exact_for_linear_data(kappa):
    # int_0^M (c0 + c1 s) s^-kappa ds in closed form
    M = 37
    w = node_weights(M, kappa)
    s = np.arange(M + 1.0)
    got = w @ (2.0 + 3.0 * s)
    exact = 2.0 * M ** (1 - kappa) / (1 - kappa) + 3.0 * M ** (2 - kappa) / (2 - kappa)
    assert got == pytest.approx(exact, rel=1e-12)
