import cmath
import math

import numpy as np
import pytest

from beurling.continuous import ContinuousSystem
from beurling.counting import enumerate_integers, tail_mean_estimate
from beurling.diamond import (
    diamond_constants, expansion_coeffs, expansion_fit, log_grid, n_series_check,
    oscillation_fit, phase_distance, pi_p1_check, self_test_constants, zeta_c1,
)
from beurling.primes import count_pi, generate
from beurling.zeta import EULER_GAMMA, K_eval


@pytest.fixture(scope="module")
def p1():
    return generate(ContinuousSystem(1.0), 60_000)


def test_zeta_c1_values():
    assert zeta_c1(2.0) == pytest.approx(math.sqrt(2))
    assert zeta_c1(1 + 1j) == 0
    with pytest.raises(ZeroDivisionError):
        zeta_c1(1.0)


@pytest.mark.parametrize("s", [2.0, 1.5 + 0.3j, 1 + 3j, 1.2 - 2j])
def test_zeta_c1_matches_K(s):
    k = K_eval(ContinuousSystem(1.0), s).value
    ref = math.exp(-EULER_GAMMA) * cmath.exp(-k) / (s - 1)
    assert abs(zeta_c1(s) - ref) < 1e-8


def test_expansion_coefficients():
    a = expansion_coeffs(3).a
    assert a[0] == pytest.approx(1 - 1j)
    assert a[1] == pytest.approx((1 - 1j) * 1j * 0.75)
    fit = expansion_fit(3)
    np.testing.assert_allclose(fit, a, atol=1e-6)
    with pytest.raises(ValueError):
        expansion_coeffs(-1)


def test_expansion_reconstructs_zeta():
    a = expansion_coeffs(30).a
    d = 0.1 * cmath.exp(0.7j)
    series = sum(c * d ** (k + 0.5) for k, c in enumerate(a))
    assert abs(series - zeta_c1(1 + 1j + d)) < 1e-12


def test_self_test_constants():
    c = self_test_constants()
    assert c.c == 1 and c.d0 == pytest.approx(1 / math.sqrt(math.pi))
    assert c.theta0 == pytest.approx(math.pi / 2)


def test_constants_small_run(p1):
    X = float(p1.primes[-1])
    k = diamond_constants(p1, X)
    assert k.d0 > 0 and k.c > 0
    A = enumerate_integers(p1, X)
    m, spread = tail_mean_estimate(A, X)
    assert abs(k.c - m) < 3 * (spread + k.err_c)
    d = k.to_dict()
    assert set(d) >= {"c", "d0", "theta0", "X_max"}
    with pytest.raises(ValueError):
        diamond_constants(p1, 10 * X)
    with pytest.raises(ValueError):
        diamond_constants(p1, X, ContinuousSystem(1.2))


def test_pi_p1_check(p1):
    grid = log_grid(1e3, float(p1.primes[-1]), 40)
    rows = pi_p1_check(p1, grid)
    assert rows.shape == (len(grid), 3)
    assert np.max(np.abs(rows[:, 2])) < 3
    # pi(x) log x / x keeps oscillating with amplitude near sqrt(2)/2
    dev = count_pi(p1, grid) * np.log(grid) / grid - 1
    assert dev.max() - dev.min() > 0.8
    with pytest.raises(ValueError):
        pi_p1_check(p1, [1.0])


def test_n_series_check_shapes(p1):
    X = float(p1.primes[-1])
    A = enumerate_integers(p1, X)
    k = diamond_constants(p1, X)
    rows = n_series_check(A, k, log_grid(1e3, X, 20))
    assert rows.shape[1] == 3 and np.all(np.isfinite(rows))
    with pytest.raises(TypeError):
        n_series_check("bogus", k, [10.0])


def test_oscillation_fit_recovers_synthetic():
    x = log_grid(1e3, 1e7, 40)
    L = np.log(x)
    N = 0.9 * x + 0.4 * x * np.cos(L + 1.1) / L ** 1.5 + 0.01 * x / L ** 1.5
    fit = oscillation_fit(x, N, 0.9)
    assert fit.amplitude == pytest.approx(0.4, rel=1e-10)
    assert phase_distance(fit.phase, 1.1) < 1e-10
    assert fit.constant == pytest.approx(0.01, abs=1e-10)


def test_phase_distance():
    assert phase_distance(0.1, 2 * math.pi + 0.1) == pytest.approx(0, abs=1e-12)
    assert phase_distance(math.pi - 0.1, -math.pi + 0.1) == pytest.approx(0.2)


def test_log_grid():
    g = log_grid(10, 1e4, 10)
    assert g[0] == 10 and g[-1] == pytest.approx(1e4) and len(g) == 31
