"""K(s), the continuous zeta function, its large-|t| asymptotics and the discrete factorization.

K(s) is the finite-part integral of cos(u^a) e^{-(s-1)u} du/u over (0, inf).
With z = s - 1 it splits as K = (F_+ + F_-)/2 where

    F_e(z) = F.p. int_0^inf exp(e*i*u^a - z*u) du/u.

Both pieces are evaluated on deformed contours.  F_- uses the ray
arg u = -pi/(2a), on which exp(-i u^a) = exp(-r^a).  For t > 0, F_+ uses a
path through the saddle u* = (t/a)^{1/(a-1)} of i u^a - i t u: a straight
segment from 0 to u*(1 - i)/2 followed by the ray u*(1 + rho e^{i pi/4}).
Along this path the exponent has nonpositive real part, and the huge phase
at the saddle is factored out before exponentiating.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .continuous import ContinuousSystem, log_density
from .primes import GeneralizedPrimeSystem, count_pi, prime_power_measure

EULER_GAMMA = float(np.euler_gamma)
T0_DEFAULT = 1e3
_GLA = np.polynomial.legendre.leggauss(16)
_GLB = np.polynomial.legendre.leggauss(24)
_UNDERFLOW = -720.0


@dataclass(frozen=True)
class ComplexSample:
    """A complex value at s with an error estimate and the method that produced it."""

    s: complex
    value: complex
    err: float
    method: str

    def __post_init__(self):
        if not self.err >= 0:
            raise ValueError("err must be nonnegative")
        if self.method not in ("direct", "oscillatory", "asymptotic"):
            raise ValueError(f"unknown method {self.method!r}")


# -- small complex helpers --------------------------------------------------

def _cexpm1(w):
    x, y = w.real, w.imag
    re = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2
    return re + 1j * np.exp(x) * np.sin(y)


def _clog1p(d):
    x, y = d.real, d.imag
    return 0.5 * np.log1p(2.0 * x + x * x + y * y) + 1j * np.arctan2(y, 1.0 + x)


def _binom_series(alpha: float, kmax: int = 40) -> np.ndarray:
    c = np.empty(kmax + 1)
    c[0] = 1.0
    for k in range(1, kmax + 1):
        c[k] = c[k - 1] * (alpha - k + 1) / k
    return c


def _q(delta: np.ndarray, alpha: float) -> np.ndarray:
    """(1+d)^a - 1 - a d, accurate for small |d|."""
    delta = np.asarray(delta, dtype=complex)
    out = np.empty_like(delta)
    small = np.abs(delta) < 0.25
    if np.any(small):
        d = delta[small]
        c = _binom_series(alpha)
        acc = np.zeros_like(d)
        for k in range(len(c) - 1, 1, -1):
            acc = acc * d + c[k]
        out[small] = acc * d * d
    if np.any(~small):
        d = delta[~small]
        L = _clog1p(d)
        out[~small] = (_cexpm1(alpha * L) - alpha * L) + alpha * (L - d)
    return out


# -- vectorized adaptive Gauss-Legendre on a real parameter -----------------

def _adaptive(g, edges, tol: float, max_panels: int = 200000):
    """Integrate complex g over [edges[0], edges[-1]] with panel splitting.

    Each panel is integrated with 16- and 24-point Gauss-Legendre; panels whose
    two estimates differ by more than ``tol/100`` (and by more than a
    rounding-level relative amount) are bisected.  Returns (value, err).
    """
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)
    total, err = 0j, 0.0
    loc_tol = tol / 100.0
    used = 0
    while a.size:
        used += a.size
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        xa = mid[:, None] + half[:, None] * _GLA[0]
        xb = mid[:, None] + half[:, None] * _GLB[0]
        va = half * (g(xa) @ _GLA[1])
        vb = half * (g(xb) @ _GLB[1])
        d = np.abs(va - vb)
        ok = (d <= loc_tol) | (d <= 1e-14 * np.abs(vb)) | (half <= 1e-15 * np.abs(mid))
        if used > max_panels:
            ok[:] = True
        total += vb[ok].sum()
        err += d[ok].sum()
        a, b = a[~ok], b[~ok]
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
    return total, err


def _geom(lo: float, hi: float, ratio: float = 1.5) -> np.ndarray:
    if hi <= lo:
        return np.array([lo, hi])
    n = max(1, int(math.ceil(math.log(hi / lo) / math.log(ratio))))
    return np.geomspace(lo, hi, n + 1)


# -- contour pieces -----------------------------------------------------------

def _exponent(u, z: complex, eps: int, alpha: float):
    return eps * 1j * u ** alpha - z * u


def _ray_integral(z: complex, eps: int, alpha: float, theta: float, R: float,
                  m: int, tol: float, tail: bool = True):
    """F.p. (m = 0) or plain (m >= 1, weight u^{m-1} du) integral of exp(E) on the ray arg u = theta, 0 < |u| < R.

    With ``tail`` the integration is truncated once the integrand underflows
    (valid on rays where the modulus decays monotonically).
    """
    rot = cmath.exp(1j * theta)
    c = min(R, 1.0 / max(1.0, abs(z)))

    def E(r):
        return _exponent(r * rot, z, eps, alpha)

    if m == 0:
        head_edges = np.concatenate([[0.0], c * 2.0 ** np.arange(-60, 1)])
        head, e1 = _adaptive(lambda r: _cexpm1(E(r)) / r, head_edges, tol)
        val = 1j * theta + math.log(c) + head
        err = e1

        def g(r):
            return np.exp(E(r)) / r
    else:
        val, err = 0j, 0.0
        c = min(c, R)
        head_edges = np.concatenate([[0.0], c * 2.0 ** np.arange(-40, 1)])

        def g(r):
            u = r * rot
            return u ** (m - 1) * np.exp(E(r)) * rot
        v, e = _adaptive(g, head_edges, tol)
        val, err = val + v, err + e
    if R > c:
        hi = R
        if tail:
            r = c
            while r < R:
                r = min(2.0 * r, R)
                if E(np.array([r]))[0].real + (m - 1) * math.log(r) < -80.0:
                    break
            hi = r
        v, e = _adaptive(g, _geom(c, hi), tol)
        val, err = val + v, err + e
    return val, err


def _saddle_parts(t: float, sig: float, alpha: float, m: int, tol: float):
    """F_+ for z = sig + i t, t > 0, alpha > 1 on the saddle path.

    Returns (Phi, S, rest, err) with F_+ (or its m-th moment) = exp(-i Phi) S + rest,
    where S is the integral over the ray through the saddle with the phase
    factored out and ``rest`` is the segment from 0.
    """
    z = complex(sig, t)
    us = (t / alpha) ** (1.0 / (alpha - 1.0))
    Lam = us ** alpha
    Phi = (alpha - 1.0) * Lam
    R_seg = us / math.sqrt(2.0)
    rest, e1 = _ray_integral(z, 1, alpha, -math.pi / 4, R_seg, m, tol, tail=False)
    rot = cmath.exp(1j * math.pi / 4)

    def expo(rho):
        d = rho * rot
        return 1j * Lam * _q(d, alpha) - sig * us * (1.0 + d)

    def g(rho):
        d = rho * rot
        val = np.exp(expo(rho)) * rot
        if m == 0:
            return val / (1.0 + d)
        return val * us ** m * (1.0 + d) ** (m - 1)

    w0 = 1.0 / math.sqrt(max(Lam * alpha * (alpha - 1.0) / 2.0, 1e-300))
    w0 = min(w0, 0.1)
    # right end: grow until the integrand is negligible
    hi = w0
    while True:
        lead = expo(np.array([hi]))[0].real + (m - 1 if m else -1) * math.log(hi + 1.0) + m * math.log(us)
        if lead < -80.0 or hi > 1e300:
            break
        hi *= 2.0
    right = np.concatenate([[0.0], w0 * 0.25 * 1.5 ** np.arange(0, 1 + int(math.ceil(math.log(max(hi / (0.25 * w0), 1.0)) / math.log(1.5))))])
    lo = 1.0 / math.sqrt(2.0)
    left = np.concatenate([[0.0], np.minimum(w0 * 0.25 * 1.5 ** np.arange(0, 200), lo)])
    left = -np.unique(left)[::-1]
    S_r, e2 = _adaptive(g, right, tol)
    S_l, e3 = _adaptive(g, left, tol)
    return Phi, S_r + S_l, rest, e1 + e2 + e3


def _k_direct(alpha: float, z: complex, m: int, tol: float):
    """Return (value, err, Phi, S, rest_total) for t = Im z >= 0."""
    sig, t = z.real, z.imag
    sign = (-1) ** m
    if alpha == 1.0:
        vals, err = [], 0.0
        for eps in (1, -1):
            w = z - eps * 1j
            if abs(w) == 0:
                raise ValueError("K has a logarithmic singularity at s = 1 +- i when alpha = 1")
            v, e = _ray_integral(z, eps, 1.0, -cmath.phase(w), math.inf, m, tol)
            vals.append(v)
            err += e
        v = 0.5 * (vals[0] + vals[1])
        return sign * v, 0.5 * err, 0.0, 0j, sign * v
    th = math.pi / (2.0 * alpha)
    Fm, em = _ray_integral(z, -1, alpha, -th, math.inf, m, tol)
    if t == 0.0:
        Fp, ep = _ray_integral(z, 1, alpha, th, math.inf, m, tol)
        v = 0.5 * (Fp + Fm)
        return sign * v, 0.5 * (ep + em), 0.0, 0j, sign * v
    Phi, S, rest, ep = _saddle_parts(t, sig, alpha, m, tol)
    nonsaddle = 0.5 * sign * (rest + Fm)
    saddle = 0.5 * sign * S
    value = cmath.exp(-1j * Phi) * saddle + nonsaddle
    return value, 0.5 * (ep + em), Phi, saddle, nonsaddle


def _check_alpha(alpha: float):
    if not 1.0 <= alpha <= 3.0:
        raise ValueError(f"contour evaluation supports 1 <= alpha <= 3, got {alpha}")


# -- public API -------------------------------------------------------------

def K_eval(sys: ContinuousSystem, s: complex, T0: float = T0_DEFAULT,
           method: str = "auto", tol: float = 1e-11) -> ComplexSample:
    """K(s) for Re s >= 1.

    ``method`` is "auto" (contour for |t| <= T0, leading asymptotics beyond),
    "oscillatory" (contour at any t) or "asymptotic".
    """
    s = complex(s)
    if s.real < 1:
        raise ValueError("K_eval supports Re s >= 1 only")
    t = s.imag
    if method == "asymptotic" or (method == "auto" and abs(t) > T0 and sys.alpha > 1):
        terms = KAsymptoticTerms.build(sys.alpha)
        val = K_asymptotic(terms, 0, t)
        return ComplexSample(s, val, _asym_err(terms, 0, t), "asymptotic")
    if method not in ("auto", "oscillatory"):
        raise ValueError(f"unknown method {method!r}")
    if abs(t) > T0 and method == "oscillatory":
        warnings.warn(f"|t| = {abs(t)} beyond T0 = {T0}; accuracy not guaranteed", RuntimeWarning)
    _check_alpha(sys.alpha)
    z = s - 1
    zz = z if t >= 0 else z.conjugate()
    v, err, *_ = _k_direct(sys.alpha, zz, 0, tol)
    if t < 0:
        v = v.conjugate()
    tag = "direct" if (t == 0 or sys.alpha == 1.0) else "oscillatory"
    return ComplexSample(s, v, err + 1e-14 * abs(v), tag)


def K_derivative(sys: ContinuousSystem, s: complex, m: int, tol: float = 1e-11,
                 method: str = "contour", h: float = 1e-5) -> ComplexSample:
    """m-th derivative of K at s (m >= 1).

    "contour" integrates (-1)^m u^{m-1} cos(u^a) e^{-zu} over the same
    contours as K; "fd" uses central differences of K_eval in t with step h.
    """
    s = complex(s)
    if m < 1:
        raise ValueError("m must be >= 1")
    if s.real < 1:
        raise ValueError("Re s >= 1 required")
    if method == "fd":
        return _fd_derivative(sys, s, m, h, tol)
    if method != "contour":
        raise ValueError(f"unknown method {method!r}")
    _check_alpha(sys.alpha)
    z = s - 1
    zz = z if s.imag >= 0 else z.conjugate()
    v, err, *_ = _k_direct(sys.alpha, zz, m, tol)
    if s.imag < 0:
        v = v.conjugate()
    return ComplexSample(s, v, err + 1e-13 * abs(v), "oscillatory")


def _fd_derivative(sys, s, m, h, tol):
    # d/ds = -i d/dt on vertical lines
    ks = [K_eval(sys, s + 1j * k * h, tol=tol) for k in (-2, -1, 0, 1, 2)]
    f = [k.value for k in ks]
    e = max(k.err for k in ks)
    if m == 1:
        d = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        val, err = -1j * d, 18 * e / (12 * h)
    elif m == 2:
        d = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        val, err = -d, 64 * e / (12 * h * h)
    else:
        raise ValueError("finite differences implemented for m = 1, 2")
    return ComplexSample(s, val, err, "direct")


def K_derivative_parts(sys: ContinuousSystem, t: float, m: int, sigma: float = 0.0,
                       tol: float = 1e-11):
    """Split K^{(m)}(1 + sigma + i t) = exp(-i Phi) S + N for t > 0.

    Returns ``(Phi, S, N, err)``; S is the saddle-ray contribution with its
    phase removed, which is what the leading asymptotic term predicts.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    _check_alpha(sys.alpha)
    if sys.alpha == 1.0:
        raise ValueError("no saddle for alpha = 1")
    v, err, Phi, S, N = _k_direct(sys.alpha, complex(sigma, t), m, tol)
    return Phi, S, N, err


@dataclass(frozen=True)
class KAsymptoticTerms:
    alpha: float
    B_alpha: float
    A: tuple

    @classmethod
    def build(cls, alpha: float, M: int = 4) -> "KAsymptoticTerms":
        if not alpha > 1:
            raise ValueError("asymptotic terms need alpha > 1")
        B = (alpha - 1) * alpha ** (-alpha / (alpha - 1))
        A = tuple((-1) ** m * alpha ** ((0.5 - m) / (alpha - 1))
                  * math.sqrt(math.pi / (2 * (alpha - 1))) for m in range(M + 1))
        return cls(alpha, B, A)

    def A_m(self, m: int) -> float:
        if m < len(self.A):
            return self.A[m]
        a = self.alpha
        return (-1) ** m * a ** ((0.5 - m) / (a - 1)) * math.sqrt(math.pi / (2 * (a - 1)))

    def exponent(self, m: int) -> float:
        return (m - self.alpha / 2) / (self.alpha - 1)

    def phase(self, t: float) -> float:
        """B_alpha |t|^{a/(a-1)}."""
        return self.B_alpha * abs(t) ** (self.alpha / (self.alpha - 1))


def K_asymptotic(terms: KAsymptoticTerms, m: int, t: float) -> complex:
    """Leading large-|t| term of K^{(m)}(1 + it)."""
    if abs(t) < 10:
        raise ValueError("asymptotic evaluation refused for |t| < 10")
    if m < 0:
        raise ValueError("m must be >= 0")
    sg = 1.0 if t > 0 else -1.0
    if m == 0:
        return complex(-math.log(abs(t)) - EULER_GAMMA, -sg * math.pi / 2)
    amp = terms.A_m(m) * abs(t) ** terms.exponent(m)
    return amp * cmath.exp(-1j * sg * (terms.phase(t) - math.pi / 4))


def _asym_err(terms: KAsymptoticTerms, m: int, t: float) -> float:
    a = terms.alpha
    if m == 0:
        return abs(terms.A_m(0)) * abs(t) ** terms.exponent(0) + special.gamma(2 * a) / (2 * abs(t) ** (2 * a))
    return abs(terms.A_m(m)) * abs(t) ** terms.exponent(m) / max(terms.phase(t), 1.0) + math.factorial(m - 1) / abs(t) ** m


# -- zeta functions -----------------------------------------------------------

def residue_c(alpha: float) -> float:
    return math.exp(-EULER_GAMMA * (1 - 1 / alpha))


def zeta_c(sys: ContinuousSystem, s: complex, **kw) -> ComplexSample:
    """zeta_C(s) = e^{-gamma} e^{-K(s)} / (s - 1)."""
    s = complex(s)
    if s == 1:
        raise ZeroDivisionError("zeta_C has a pole at s = 1")
    k = K_eval(sys, s, **kw)
    v = math.exp(-EULER_GAMMA) * cmath.exp(-k.value) / (s - 1)
    return ComplexSample(s, v, abs(v) * (k.err + 1e-15), k.method)


def _pi_excess(P: GeneralizedPrimeSystem, X: float) -> float:
    """Pi(X) - pi(X), the prime-power part of the Riemann counting function."""
    out, n = 0.0, 2
    p1 = P.primes[0]
    while X ** (1.0 / n) >= p1:
        out += count_pi(P, X ** (1.0 / n)) / n
        n += 1
    return out


def correction_integral(P: GeneralizedPrimeSystem, sysC: ContinuousSystem, s: complex,
                        n: int, X_max: float, tol: float = 1e-10) -> ComplexSample:
    """int_1^{X_max} x^{-s} log^n x d(Pi - Pi_C)(x).

    The atomic part runs over prime powers p^k <= X_max with weight 1/k; the
    continuous part is Gauss-Legendre quadrature in u = log x on panels short
    enough to resolve e^{-i t u}.  The error adds a truncation bound from
    |Pi - Pi_C| <= (Pi - pi) + 1 beyond X_max.
    """
    s = complex(s)
    if s.real < 1:
        raise ValueError("Re s >= 1 required")
    if n < 0:
        raise ValueError("n must be >= 0")
    if len(P) == 0 or X_max > P.primes[-1] * (1 + 1e-12):
        raise ValueError("X_max beyond the generated range")
    mu = prime_power_measure(P, X_max)
    lx = np.log(mu.positions)
    atoms = np.sum(mu.weights * np.exp(-s * lx) * lx ** n)
    cont, qerr = _continuous_part(sysC.alpha, s, n, math.log(X_max), tol)
    pe = _pi_excess(P, X_max)
    trunc = math.log(X_max) ** n * ((pe + 1) + abs(s) * (2 * pe + 1) + n) / X_max
    return ComplexSample(s, complex(atoms - cont), trunc + qerr + 1e-14 * abs(atoms), "direct")


def _continuous_part(alpha: float, s: complex, n: int, U: float, tol: float):
    z = s - 1

    def g(u):
        return 2.0 * np.sin(0.5 * u ** alpha) ** 2 / u * np.exp(-z * u) * u ** n

    width = min(0.25, 1.0 / max(1.0, abs(z.imag)))
    k = max(1, int(math.ceil(U / width)))
    edges = np.linspace(0.0, U, k + 1)
    return _adaptive(g, edges, tol)


def atomized_continuous(sysC: ContinuousSystem, X: float, per_unit: int = 4000) -> tuple:
    """Atoms approximating dPi_C on [1, X] by midpoint masses on a fine u-grid (self test)."""
    U = math.log(X)
    k = int(math.ceil(U * per_unit))
    edges = np.linspace(0.0, U, k + 1)
    mass = np.diff(sysC.pi_c_u(edges))
    mid = 0.5 * (edges[1:] + edges[:-1])
    return np.exp(mid), mass


def a_alpha(P: GeneralizedPrimeSystem, sysC: ContinuousSystem, X_max: float) -> tuple[float, float]:
    """Density constant exp(-gamma(1 - 1/a) + int x^{-1} d(Pi - Pi_C)) and its error."""
    if not sysC.alpha > 1:
        raise ValueError("a_alpha needs alpha > 1")
    c = correction_integral(P, sysC, 1.0, 0, X_max)
    val = math.exp(-EULER_GAMMA * (1 - 1 / sysC.alpha) + c.value.real)
    return val, val * c.err


def zeta_discrete(P: GeneralizedPrimeSystem, sysC: ContinuousSystem, s: complex,
                  X_max: float, n: int = 0) -> ComplexSample:
    """zeta^{(n)}(s), n = 0, 1, 2, from zeta = zeta_C * exp(correction)."""
    s = complex(s)
    if s == 1:
        raise ZeroDivisionError("zeta has a pole at s = 1")
    if n not in (0, 1, 2):
        raise ValueError("n must be 0, 1 or 2")
    zc = zeta_c(sysC, s)
    c0 = correction_integral(P, sysC, s, 0, X_max)
    val = zc.value * cmath.exp(c0.value)
    rel = zc.err / max(abs(zc.value), 1e-300) + c0.err
    if n == 0:
        return ComplexSample(s, val, abs(val) * rel, zc.method)
    k1 = K_derivative(sysC, s, 1)
    c1 = correction_integral(P, sysC, s, 1, X_max)
    L1 = -k1.value - 1 / (s - 1) - c1.value
    e1 = k1.err + c1.err
    if n == 1:
        return ComplexSample(s, val * L1, abs(val) * (abs(L1) * rel + e1), "oscillatory")
    k2 = K_derivative(sysC, s, 2)
    c2 = correction_integral(P, sysC, s, 2, X_max)
    L2 = -k2.value + 1 / (s - 1) ** 2 + c2.value
    e2 = k2.err + c2.err + 2 * abs(L1) * e1
    v2 = val * (L1 * L1 + L2)
    return ComplexSample(s, v2, abs(val) * (abs(L1 * L1 + L2) * rel + e2), "oscillatory")


def dirichlet_sum(values: np.ndarray, weights: np.ndarray, s: complex, X: float, a: float) -> complex:
    """1 + sum w n^{-s} over n <= X plus the smooth tail a X^{1-s}/(s-1)."""
    s = complex(s)
    keep = values <= X
    head = 1.0 + np.sum(weights[keep] * np.exp(-s * np.log(values[keep])))
    return complex(head + a * X ** (1 - s) / (s - 1))


def correction_lower_exponent(P: GeneralizedPrimeSystem, sysC: ContinuousSystem, X_max: float,
                              ts) -> float:
    """Smallest m with |exp(correction(1 + it))| >= log^{-m} t on the sample ``ts`` (t > e)."""
    worst = 0.0
    for t in ts:
        if t <= math.e:
            raise ValueError("t must exceed e")
        c = correction_integral(P, sysC, complex(1, t), 0, X_max).value.real
        worst = max(worst, -c / math.log(math.log(t)))
    return worst
