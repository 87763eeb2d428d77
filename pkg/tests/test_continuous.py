import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from beurling.classical import li
from beurling.continuous import ContinuousSystem, log_density, scaled_density, scaled_li_remainder


def _integrand(t, alpha):
    L = math.log(t)
    return (1 - math.cos(L ** alpha)) / L if L > 0 else 0.0


def _simpson_adaptive(f, a, b, tol, depth=60):
    def simp(a, fa, b, fb):
        m = 0.5 * (a + b)
        fm = f(m)
        return m, fm, (b - a) / 6 * (fa + 4 * fm + fb)

    def rec(a, fa, b, fb, m, fm, whole, tol, depth):
        lm, flm, left = simp(a, fa, m, fm)
        rm, frm, right = simp(m, fm, b, fb)
        if depth <= 0 or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15
        return (rec(a, fa, m, fm, lm, flm, left, tol / 2, depth - 1)
                + rec(m, fm, b, fb, rm, frm, right, tol / 2, depth - 1))

    fa, fb = f(a), f(b)
    m, fm, whole = simp(a, fa, b, fb)
    return rec(a, fa, b, fb, m, fm, whole, tol, depth)


def _pi_c_quad(x, alpha):
    v, _ = integrate.quad(_integrand, 1, x, args=(alpha,), epsabs=1e-14, epsrel=1e-13, limit=2000)
    return v


@pytest.fixture(scope="module")
def sys15():
    return ContinuousSystem(1.5)


def test_pi_c_at_one(sys15):
    assert sys15.pi_c(1.0) == 0.0


def test_pi_c_simpson_oracle(sys15):
    ref = _simpson_adaptive(lambda t: _integrand(t, 1.5), 1.0, 100.0, 1e-12)
    assert sys15.pi_c(100.0) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("alpha", [1.0, 1.2, 2.0])
@pytest.mark.parametrize("x", [1.5, 7.0, 1e3, 1e5])
def test_pi_c_quad_oracle(alpha, x):
    s = ContinuousSystem(alpha)
    assert s.pi_c(x) == pytest.approx(_pi_c_quad(x, alpha), rel=1e-9)


def test_pi_c_domain(sys15):
    with pytest.raises(ValueError):
        sys15.pi_c(0.5)


def test_system_validation():
    with pytest.raises(ValueError):
        ContinuousSystem(0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.0, 1e6), st.floats(1.0, 1e6))
def test_pi_c_monotone(a, b):
    s = ContinuousSystem(1.2)
    lo, hi = sorted((a, b))
    assert s.pi_c(hi) >= s.pi_c(lo)


def test_densities_agree():
    u = np.linspace(0.01, 20, 50)
    np.testing.assert_allclose(log_density(u, 1.3) * np.exp(-u), scaled_density(u, 1.3), rtol=1e-13)
    assert log_density(0.0, 1.3) == 0.0


def test_inverse_zero():
    assert ContinuousSystem(1.2).pi_c_inverse(0.0) == 1.0


@pytest.mark.parametrize("r", [1, 2, 10, 100])
def test_inverse_roundtrip(r):
    s = ContinuousSystem(1.2)
    assert s.pi_c(s.pi_c_inverse(r)) == pytest.approx(r, abs=1e-9)


def test_inverse_bisection_oracle():
    # bisection on the quadrature oracle for alpha = 1, r = 1
    lo, hi = 1.0, 100.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _pi_c_quad(mid, 1.0) < 1:
            lo = mid
        else:
            hi = mid
    assert ContinuousSystem(1.0).pi_c_inverse(1.0) == pytest.approx(lo, rel=1e-9)


def test_inverse_many_matches_scalar():
    s = ContinuousSystem(1.0)
    r = np.array([0.0, 0.5, 1.0, 7.0, 123.0, 4567.0])
    got = s.inverse_many(r)
    ref = [s.pi_c_inverse(v) for v in r]
    np.testing.assert_allclose(got, ref, rtol=1e-11)
    np.testing.assert_allclose(s.pi_c(got[1:]), r[1:], rtol=1e-11)


def test_li_remainder_at_two():
    s = ContinuousSystem(1.2)
    assert s.li_remainder(2.0) == pytest.approx(s.pi_c(2.0), abs=1e-15)
    assert li(2.0) == 0.0


def test_li_remainder_bounded_alpha_12():
    s = ContinuousSystem(1.2)
    x = np.array([1e3, 1e4, 1e5, 1e6, 1e7])
    r = scaled_li_remainder(s, x)
    assert np.all(r < 5)


def test_alpha_one_scaled_remainder_does_not_decay():
    s = ContinuousSystem(1.0)
    x = np.geomspace(1e3, 1e7, 400)
    r = np.abs(s.li_remainder_array(x)) * np.log(x) / x
    # compare the oscillation sizes on the first and last halves of the range
    h = len(x) // 2
    assert r[h:].max() > 0.5 and r[h:].max() > 0.8 * r[:h].max()
