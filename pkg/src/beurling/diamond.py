"""The alpha = 1 system: closed-form zeta, branch expansions, constants and oscillation checks."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import binom

from .continuous import ContinuousSystem
from .counting import IntegerAtoms, VolterraSolution
from .primes import GeneralizedPrimeSystem, count_pi
from .zeta import correction_integral

SQRT_PI = math.sqrt(math.pi)


def zeta_c1(s: complex) -> complex:
    """(s-1-i)^{1/2} (s-1+i)^{1/2} / (s-1) with principal square roots."""
    s = complex(s)
    if s == 1:
        raise ZeroDivisionError("zeta_C1 has a pole at s = 1")
    return cmath.sqrt(s - 1 - 1j) * cmath.sqrt(s - 1 + 1j) / (s - 1)


@dataclass(frozen=True)
class ExpansionCoefficients:
    """zeta_C1(s) = sum_k a_k (s-1-i)^{k+1/2} near 1+i; b_0 is the P1 analogue of a_0."""

    a: tuple
    b0: complex | None = None


def expansion_coeffs(k_max: int, b0: complex | None = None) -> ExpansionCoefficients:
    """a_k = (1-i) i^k sum_{j<=k} binom(1/2, j) (-1/2)^j."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    partial = np.cumsum([binom(0.5, j) * (-0.5) ** j for j in range(k_max + 1)])
    a = tuple(complex((1 - 1j) * 1j ** k * partial[k]) for k in range(k_max + 1))
    return ExpansionCoefficients(a, b0)


def expansion_fit(k_max: int, radius: float = 0.2, n: int = 256) -> np.ndarray:
    """Taylor coefficients of zeta_C1(s)/(s-1-i)^{1/2} at 1+i from samples on a circle.

    The quotient (2i + d)^{1/2}/(i + d) is analytic for |d| < 1, so the
    discrete Fourier transform of its values on |d| = radius gives the
    coefficients up to aliasing of order radius^n.
    """
    d = radius * np.exp(2j * np.pi * np.arange(n) / n)
    s = 1 + 1j + d
    vals = np.array([zeta_c1(v) for v in s]) / np.sqrt(d)
    # zeta_c1 uses the same principal root of d, so the quotient is analytic
    c = np.fft.fft(vals) / n
    return c[: k_max + 1] / radius ** np.arange(k_max + 1)


@dataclass(frozen=True)
class DiamondConstants:
    c: float
    d0: float
    theta0: float
    X_max: float
    err_c: float
    err_d0: float
    err_theta0: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def diamond_constants(P1: GeneralizedPrimeSystem, X_max: float,
                      sysC: ContinuousSystem | None = None) -> DiamondConstants:
    """c = e^{C(1)}, d0 e^{i theta0} = i e^{C(1+i)}/sqrt(pi), with C(s) = int x^{-s} d(Pi - Pi_C)."""
    sysC = sysC or ContinuousSystem(1.0)
    if sysC.alpha != 1.0:
        raise ValueError("Diamond constants need the alpha = 1 system")
    if len(P1) == 0 or P1.primes[-1] < X_max:
        raise ValueError("insufficient generated range")
    c1 = correction_integral(P1, sysC, 1.0, 0, X_max)
    ci = correction_integral(P1, sysC, 1 + 1j, 0, X_max)
    c = math.exp(c1.value.real)
    d0 = math.exp(ci.value.real) / SQRT_PI
    theta0 = math.pi / 2 + ci.value.imag
    return DiamondConstants(c, d0, theta0, X_max, c * c1.err, d0 * ci.err, ci.err)


def self_test_constants() -> DiamondConstants:
    """Constants of the continuous system itself (vanishing corrections)."""
    return DiamondConstants(1.0, 1.0 / SQRT_PI, math.pi / 2, math.inf, 0.0, 0.0, 0.0)


def pi_p1_check(P1: GeneralizedPrimeSystem, grid) -> np.ndarray:
    """Rows (x, residual, residual log^2 x / x) for pi(x) against x/log x (1 - cos(log x - pi/4)/sqrt 2)."""
    x = np.asarray(grid, dtype=float)
    if x.size == 0 or x.min() < 2 or x.max() > P1.primes[-1]:
        raise ValueError("grid outside the generated range")
    L = np.log(x)
    main = x / L * (1 - np.cos(L - np.pi / 4) / math.sqrt(2))
    res = count_pi(P1, x) - main
    return np.column_stack([x, res, res * L * L / x])


def _N_of(N, x):
    if isinstance(N, (IntegerAtoms, VolterraSolution)):
        return np.asarray(N.N(x), dtype=float)
    if callable(N):
        return np.asarray(N(x), dtype=float)
    raise TypeError("N must be IntegerAtoms, VolterraSolution or callable")


def n_series_check(N, constants: DiamondConstants, grid) -> np.ndarray:
    """Rows (x, residual, residual log^{5/2} x / x) after removing c x + d0 x cos(log x + theta0)/log^{3/2} x."""
    x = np.asarray(grid, dtype=float)
    L = np.log(x)
    model = constants.c * x + constants.d0 * x * np.cos(L + constants.theta0) / L ** 1.5
    res = _N_of(N, x) - model
    return np.column_stack([x, res, res * L ** 2.5 / x])


@dataclass(frozen=True)
class OscillationFit:
    constant: float
    amplitude: float
    phase: float
    rms: float


def oscillation_fit(x, N, c: float, power: float = 1.5) -> OscillationFit:
    """Least squares (N(x) - c x) log^power x / x = k + A cos L + B sin L, L = log x.

    Returned amplitude and phase describe A cos L + B sin L = amp cos(L + phase).
    """
    x = np.asarray(x, dtype=float)
    L = np.log(x)
    y = (np.asarray(N, dtype=float) - c * x) * L ** power / x
    M = np.column_stack([np.ones_like(L), np.cos(L), np.sin(L)])
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    k, A, B = coef
    rms = float(np.sqrt(np.mean((M @ coef - y) ** 2)))
    return OscillationFit(float(k), float(math.hypot(A, B)), float(math.atan2(-B, A)), rms)


def phase_distance(a: float, b: float) -> float:
    d = (a - b + math.pi) % (2 * math.pi) - math.pi
    return abs(d)


def log_grid(lo: float, hi: float, per_decade: int = 40) -> np.ndarray:
    n = int(math.ceil(math.log10(hi / lo) * per_decade)) + 1
    return np.geomspace(lo, hi, n)
