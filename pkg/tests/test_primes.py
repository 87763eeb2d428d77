import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from beurling.classical import li_array, sieve
from beurling.continuous import ContinuousSystem
from beurling.primes import (
    GeneralizedPrimeSystem, count_pi, gap_check, generate, load_binary, load_csv, mertens_fit,
    prime_power_measure, reciprocal_sum, sandwich_check, save_binary, save_csv,
)

MERTENS = 0.2614972128476428


@pytest.fixture(scope="module")
def p12():
    return generate(ContinuousSystem(1.2), 20_000)


def test_generate_first_alpha_one():
    def pc(x):
        f = lambda t: (1 - math.cos(math.log(t))) / math.log(t) if t > 1 else 0.0
        return integrate.quad(f, 1, x, epsabs=1e-14, epsrel=1e-13, limit=500)[0]

    lo, hi = 1.0, 50.0
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if pc(mid) < 1 else (lo, mid)
    P = generate(ContinuousSystem(1.0), 1)
    assert P.count == 1 and P.alpha == 1.0 and P.source == "P_alpha"
    assert P.primes[0] == pytest.approx(lo, rel=1e-9)


def test_generate_validation():
    with pytest.raises(ValueError):
        generate(ContinuousSystem(1.2), 0)


def test_system_validation():
    with pytest.raises(ValueError):
        GeneralizedPrimeSystem(np.array([3.0, 2.0]))
    with pytest.raises(ValueError):
        GeneralizedPrimeSystem(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        GeneralizedPrimeSystem(np.array([2.0]), source="bogus")
    P = GeneralizedPrimeSystem.from_values([5, 2, 2])
    assert P.count == 3
    with pytest.raises(ValueError):
        P.primes[0] = 7.0


def test_count_pi_edges():
    P = GeneralizedPrimeSystem.from_values([2, 2, 3.5])
    assert count_pi(P, 1.99) == 0
    assert count_pi(P, 2) == 2
    assert count_pi(P, 3.4) == 2 and count_pi(P, 3.5) == 3
    np.testing.assert_array_equal(count_pi(P, [0, 2, 10]), [0, 2, 3])
    with pytest.raises(ValueError):
        count_pi(P, -1)


def test_sandwich(p12):
    rep = sandwich_check(p12, ContinuousSystem(1.2))
    assert rep.holds(1e-6)
    assert rep.lower > -1e-6 and rep.upper < 1 + 1e-6


def test_pi_minus_li_bounded(p12):
    x = np.geomspace(100, p12.primes[-1], 200)
    r = np.abs(count_pi(p12, x) - li_array(x)) * np.log(x) ** 1.2 / x
    assert r.max() < 5


def test_gap_check_single_and_threshold(p12):
    assert gap_check(GeneralizedPrimeSystem.from_values([3.0])).count == 0
    rep = gap_check(p12)
    p = p12.primes
    r = np.arange(rep.threshold, len(p))  # 1-based indices beyond the threshold
    gaps = p[r] - p[r - 1]
    assert np.all(gaps < p[r - 1] ** (2 / 3) * np.log(p[r - 1]))


def test_gap_check_alpha_one_threshold():
    rep = gap_check(generate(ContinuousSystem(1.0), 100_000))
    assert 1 <= rep.threshold < 1000


def test_mertens_rational_primes():
    T = sieve(10**7)
    P = GeneralizedPrimeSystem(T.primes.astype(float), source="rational")
    fit = mertens_fit(P, np.geomspace(100, 9.9e6, 100))
    assert fit.M_hat == pytest.approx(MERTENS, abs=2e-4)


def test_mertens_scaled_residual_bounded(p12):
    fit = mertens_fit(p12, np.geomspace(10, p12.primes[-1], 100))
    assert np.all(np.abs(fit.scaled_residuals(1.2)) < 2)


def test_mertens_errors(p12):
    with pytest.raises(ValueError):
        mertens_fit(p12, [])
    with pytest.raises(ValueError):
        mertens_fit(p12, [2.0, 10.0])


def test_reciprocal_sum():
    P = GeneralizedPrimeSystem.from_values([2, 3, 3])
    assert reciprocal_sum(P, 3) == pytest.approx(0.5 + 2 / 3)


def test_prime_power_measure():
    P = GeneralizedPrimeSystem.from_values([2, 3])
    m = prime_power_measure(P, 10)
    np.testing.assert_allclose(m.positions, [2, 3, 4, 8, 9])
    np.testing.assert_allclose(m.weights, [1, 1, 0.5, 1 / 3, 0.5])
    assert m.cumulative(8) == pytest.approx(2 + 0.5 + 1 / 3)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(1.01, 1e6, allow_nan=False), min_size=1, max_size=40))
def test_csv_binary_roundtrip(tmp_path_factory, vals):
    P = GeneralizedPrimeSystem.from_values(vals)
    d = tmp_path_factory.mktemp("io")
    save_csv(P, d / "p.csv")
    save_binary(P, d / "p.bin")
    for Q in (load_csv(d / "p.csv"), load_binary(d / "p.bin")):
        np.testing.assert_array_equal(Q.primes, P.primes)
        assert Q.source == P.source


def test_csv_header(tmp_path, p12):
    save_csv(p12, tmp_path / "a.csv")
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "# schema_version=1"
    assert lines[2] == "index,prime"
    Q = load_csv(tmp_path / "a.csv")
    assert Q.alpha == 1.2 and Q.count == p12.count


def test_binary_truncated(tmp_path, p12):
    save_binary(p12, tmp_path / "a.bin")
    raw = (tmp_path / "a.bin").read_bytes()
    (tmp_path / "b.bin").write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        load_binary(tmp_path / "b.bin")
    (tmp_path / "c.bin").write_bytes(b"nope")
    with pytest.raises(ValueError):
        load_binary(tmp_path / "c.bin")
