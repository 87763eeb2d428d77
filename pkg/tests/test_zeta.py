import cmath
import math

import numpy as np
import pytest
from scipy import integrate

from beurling.continuous import ContinuousSystem
from beurling.counting import enumerate_integers
from beurling.primes import generate
from beurling.zeta import (
    EULER_GAMMA, ComplexSample, K_asymptotic, K_derivative, K_derivative_parts, K_eval,
    KAsymptoticTerms, a_alpha, atomized_continuous, correction_integral, correction_lower_exponent,
    dirichlet_sum,
    residue_c, zeta_c, zeta_discrete,
)
from beurling.zeta import _continuous_part

ALPHAS = [1.0, 1.25, 1.5, 2.0, 3.0]


def _k_quad(alpha, s):
    """-gamma - log z - int_0^inf (1 - cos u^a) e^{-zu}/u du, for Re z > 0."""
    z = s - 1

    def f(u, part):
        v = (1 - math.cos(u ** alpha)) * cmath.exp(-z * u) / u if u > 0 else 0.0
        return v.real if part == 0 else v.imag

    up = 60.0 / z.real
    re = integrate.quad(f, 0, up, args=(0,), limit=5000, epsabs=1e-13, epsrel=1e-12)[0]
    im = integrate.quad(f, 0, up, args=(1,), limit=5000, epsabs=1e-13, epsrel=1e-12)[0]
    return -EULER_GAMMA - cmath.log(z) - complex(re, im)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_K_at_one(alpha):
    k = K_eval(ContinuousSystem(alpha), 1.0)
    assert abs(k.value + EULER_GAMMA / alpha) < 1e-10


@pytest.mark.parametrize("s", [2, 1.5, 1 + 2j, 1 + 0.5j, 1 + 5j, 1.3 - 4j])
def test_K_alpha_one_closed_form(s):
    ref = -EULER_GAMMA - 0.5 * cmath.log(1 + (s - 1) ** 2)
    k = K_eval(ContinuousSystem(1.0), s)
    assert abs(k.value - ref) < 1e-10


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("alpha", [1.25, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("s", [2.0, 1.5 + 3j, 1.5 - 1j])
def test_K_against_quadrature(alpha, s):
    k = K_eval(ContinuousSystem(alpha), s)
    assert abs(k.value - _k_quad(alpha, s)) < 1e-8


def test_K_conjugate_symmetry():
    sys = ContinuousSystem(1.5)
    a = K_eval(sys, 1 + 7j).value
    b = K_eval(sys, 1 - 7j).value
    assert abs(a - b.conjugate()) < 1e-12


def test_K_large_t_alpha_125():
    k = K_eval(ContinuousSystem(1.25), 1 + 500j)
    assert abs(k.value + math.log(500) + EULER_GAMMA + 0.5j * math.pi) < 1e-4


def test_K_auto_switch_and_errors():
    sys = ContinuousSystem(1.5)
    assert K_eval(sys, 1 + 2000j).method == "asymptotic"
    assert K_eval(sys, 1 + 20j).method == "oscillatory"
    with pytest.warns(RuntimeWarning):
        K_eval(sys, 1 + 1200j, T0=1000, method="oscillatory")
    with pytest.raises(ValueError):
        K_eval(sys, 0.5)
    with pytest.raises(ValueError):
        K_eval(sys, 2.0, method="bogus")
    with pytest.raises(ValueError):
        K_eval(ContinuousSystem(4.0), 2.0)


@pytest.mark.parametrize("alpha", [1.0, 1.25, 2.0])
@pytest.mark.parametrize("m", [1, 2])
def test_derivative_contour_vs_fd(alpha, m):
    sys = ContinuousSystem(alpha)
    s = 1.1 + 2.5j
    a = K_derivative(sys, s, m).value
    b = K_derivative(sys, s, m, method="fd", h=1e-3 if m == 2 else 1e-4).value
    assert abs(a - b) < 1e-6 * max(1, abs(a))


def test_derivative_errors():
    sys = ContinuousSystem(1.5)
    with pytest.raises(ValueError):
        K_derivative(sys, 2.0, 0)
    with pytest.raises(ValueError):
        K_derivative(sys, 2.0, 1, method="bogus")


def test_asymptotic_terms():
    T = KAsymptoticTerms.build(2.0)
    assert T.B_alpha == pytest.approx(0.25)
    assert T.A_m(1) < 0 and T.A_m(2) > 0
    with pytest.raises(ValueError):
        K_asymptotic(T, 1, 5.0)
    with pytest.raises(ValueError):
        KAsymptoticTerms.build(1.0)
    v = K_asymptotic(T, 0, 100.0)
    assert v == pytest.approx(complex(-math.log(100) - EULER_GAMMA, -math.pi / 2))


def test_asymptotic_agreement_improves():
    # compare with the phase factored out: exp(-i Phi) is numerically meaningless at Phi ~ 1e13
    sys = ContinuousSystem(1.25)
    T = KAsymptoticTerms.build(1.25)
    rel = []
    for t in (100.0, 300.0, 1000.0):
        Phi, S, N, err = K_derivative_parts(sys, t, 1)
        A = T.A_m(1) * t ** T.exponent(1)
        rel.append(abs(S - A * cmath.exp(0.25j * math.pi) + cmath.exp(1j * Phi) * N) / abs(A))
        assert Phi == pytest.approx(T.phase(t), rel=1e-12)
    assert rel[0] > rel[1] > rel[2] and rel[2] < 1e-6


def test_zeta_c_values():
    assert abs(zeta_c(ContinuousSystem(1.0), 2.0).value - math.sqrt(2)) < 1e-12
    for alpha in (1.25, 2.0):
        sys = ContinuousSystem(alpha)
        eps = 1e-7
        approx = eps * zeta_c(sys, 1 + eps).value
        assert approx.real == pytest.approx(residue_c(alpha), rel=1e-5)
    with pytest.raises(ZeroDivisionError):
        zeta_c(ContinuousSystem(1.5), 1.0)


def test_complex_sample_validation():
    with pytest.raises(ValueError):
        ComplexSample(1.0, 1.0, -1.0, "direct")
    with pytest.raises(ValueError):
        ComplexSample(1.0, 1.0, 0.0, "nope")


def test_correction_self_test():
    sysC = ContinuousSystem(1.2)
    X = 1e3
    pos, mass = atomized_continuous(sysC, X)
    for s in (2.0, 1.0 + 3j):
        atoms = np.sum(mass * np.exp(-complex(s) * np.log(pos)))
        cont, _ = _continuous_part(1.2, complex(s), 0, math.log(X), 1e-12)
        assert abs(atoms - cont) < 1e-6


@pytest.fixture(scope="module")
def p12():
    return generate(ContinuousSystem(1.2), 20_000)


def test_correction_errors(p12):
    sysC = ContinuousSystem(1.2)
    with pytest.raises(ValueError):
        correction_integral(p12, sysC, 2.0, 0, 1e9)
    with pytest.raises(ValueError):
        correction_integral(p12, sysC, 0.5, 0, 1e3)


def test_correction_slow_growth(p12):
    sysC = ContinuousSystem(1.2)
    X = float(p12.primes[-1])
    vals = [abs(correction_integral(p12, sysC, 1 + 1j * t, 0, X).value.real)
            for t in (10.0, 100.0, 1000.0)]
    assert max(vals) < 2 + math.log(math.log(1000))


def test_a_alpha_positive(p12):
    v, err = a_alpha(p12, ContinuousSystem(1.2), float(p12.primes[-1]))
    assert v > 0 and err > 0
    # corrections vanish in the self test limit, leaving the residue
    assert abs(math.log(v) - math.log(residue_c(1.2))) < 0.5
    with pytest.raises(ValueError):
        a_alpha(p12, ContinuousSystem(1.0), 1e3)


def test_zeta_discrete_vs_dirichlet(p12):
    sysC = ContinuousSystem(1.2)
    X = float(p12.primes[-1])
    A = enumerate_integers(p12, X)
    a, _ = a_alpha(p12, sysC, X)
    for s in (2.0, 2.0 + 5j):
        z = zeta_discrete(p12, sysC, s, X)
        d = dirichlet_sum(A.values, A.weights, s, X, a)
        assert abs(z.value - d) < 1e-6 + z.err


def test_zeta_discrete_derivatives_fd(p12):
    sysC = ContinuousSystem(1.2)
    X = float(p12.primes[-1])
    s, h = 1.5 + 2j, 1e-4
    f = lambda w: zeta_discrete(p12, sysC, w, X).value
    d1 = zeta_discrete(p12, sysC, s, X, n=1).value
    d2 = zeta_discrete(p12, sysC, s, X, n=2).value
    assert abs(d1 - (f(s + h) - f(s - h)) / (2 * h)) < 1e-5 * abs(d1)
    assert abs(d2 - (f(s + h) - 2 * f(s) + f(s - h)) / h ** 2) < 1e-3 * abs(d2)
    with pytest.raises(ValueError):
        zeta_discrete(p12, sysC, s, X, n=3)
    with pytest.raises(ZeroDivisionError):
        zeta_discrete(p12, sysC, 1.0, X)


def test_zeta_discrete_polynomial_growth(p12):
    sysC = ContinuousSystem(1.2)
    X = float(p12.primes[-1])
    # K^{(m)} grows like t^{(m - a/2)/(a - 1)}, so log-log slopes stay bounded
    bound = {0: 1.0, 1: 3.0, 2: 8.0}
    for n in (0, 1, 2):
        v = [abs(zeta_discrete(p12, sysC, 1 + 1j * t, X, n=n).value) for t in (10.0, 100.0)]
        assert math.log10(v[1] / v[0]) < bound[n]


def test_correction_lower_exponent(p12):
    sysC = ContinuousSystem(1.2)
    X = float(p12.primes[-1])
    ts = np.geomspace(10, 1e3, 12)
    m = correction_lower_exponent(p12, sysC, X, ts)
    worst = max(-correction_integral(p12, sysC, 1 + 1j * t, 0, X).value.real / math.log(math.log(t))
                for t in ts)
    assert m == pytest.approx(max(worst, 0.0))
    assert 0 <= m <= 2
    with pytest.raises(ValueError):
        correction_lower_exponent(p12, sysC, X, [2.0])
