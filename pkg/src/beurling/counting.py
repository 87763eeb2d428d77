"""Generalized integers: enumeration, the measure exponential, Riesz means, Kahane integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.signal import fftconvolve
from scipy.special import binom

from .primes import GeneralizedPrimeSystem, count_pi

DEFAULT_CAP = 10**8
_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


class EnumerationCapError(RuntimeError):
    """Raised when an enumeration would exceed the configured atom cap."""


@dataclass(frozen=True)
class IntegerAtoms:
    """Generalized integers n_k > 1 in increasing order with multiplicities.

    The unit n_0 = 1 is implicit, so ``N(x) = 1 + sum of weights of atoms <= x``
    for x >= 1.
    """

    values: np.ndarray
    weights: np.ndarray
    limit: float = math.inf
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights)
        if v.shape != w.shape:
            raise ValueError("values and weights differ in shape")
        if v.size and (v[0] <= 1 or np.any(np.diff(v) < 0)):
            raise ValueError("atom values must be > 1 and nondecreasing")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_cum", np.concatenate([[0], np.cumsum(w)]))

    def __len__(self):
        return len(self.values)

    @property
    def total(self):
        return self._cum[-1]

    def N(self, x):
        """Counting function N(x) (right-continuous), vectorized; N = 0 below 1."""
        xa = np.asarray(x, dtype=float)
        out = 1 + self._cum[np.searchsorted(self.values, xa, side="right")]
        out = np.where(xa >= 1, out, 0)
        return out.item() if out.ndim == 0 else out

    def expanded(self) -> np.ndarray:
        return np.repeat(self.values, self.weights.astype(np.int64))

    def to_csv(self) -> str:
        rows = ["# schema_version=1", "value,weight"]
        rows += [f"{v:.17g},{w}" for v, w in zip(self.values, self.weights)]
        return "\n".join(rows) + "\n"


def _merge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.concatenate([a, b])
    out.sort(kind="stable")
    return out


def enumerate_integers(P: GeneralizedPrimeSystem, x: float, cap: int = DEFAULT_CAP) -> IntegerAtoms:
    """All multiset products of primes of ``P`` up to ``x``, with multiplicity.

    Prime indices are taken in decreasing order.  After index j has been
    processed the pool holds every product of primes with index >= j; the next
    (smaller) prime p then contributes p^k times each pooled value <= x/p^k.
    The pool is kept as a list of sorted runs that are merged log-structured
    style, so each step only binary searches the runs for the value cutoff.
    Equal prime values are distinct indices and so yield multiplicities.
    """
    if x < 1:
        raise ValueError("x must be >= 1")
    p = P.primes[P.primes <= x]
    if p.size == 0:
        return IntegerAtoms(np.zeros(0), np.zeros(0, dtype=np.int64), limit=x)
    big = p[p * p > x]
    small = p[p * p <= x]
    if big.size > cap:
        raise EnumerationCapError(f"atom count exceeds cap={cap}")
    runs = [np.array([1.0]), big.astype(float)] if big.size else [np.array([1.0])]
    total = 1 + big.size
    for q in small[::-1]:
        lim = x / q
        fresh = []
        for r in runs:
            k = int(np.searchsorted(r, lim, side="right"))
            cur = r[:k] * q
            while cur.size:
                cur = cur[cur <= x]
                if not cur.size:
                    break
                fresh.append(cur)
                total += cur.size
                if total > cap:
                    raise EnumerationCapError(f"atom count exceeds cap={cap}")
                cur = cur[:int(np.searchsorted(cur, lim, side="right"))] * q
        fresh.sort(key=len, reverse=True)
        for f in fresh:
            runs.append(f)
            while len(runs) > 1 and len(runs[-1]) * 2 >= len(runs[-2]):
                b = runs.pop()
                runs[-1] = _merge(runs[-1], b)
    allv = runs[0]
    for r in runs[1:]:
        allv = _merge(allv, r)
    vals, counts = np.unique(allv[1:], return_counts=True)  # drop the unit
    return IntegerAtoms(vals, counts.astype(np.int64), limit=x)


def brute_force_integers(P: GeneralizedPrimeSystem, x: float) -> np.ndarray:
    """Sorted list of all multiset products <= x (with repetition), by exponent vectors."""
    import itertools

    p = [float(v) for v in P.primes if v <= x]
    ranges = [range(int(math.floor(math.log(x) / math.log(v) + 1e-12)) + 1) for v in p]
    out = []
    for e in itertools.product(*ranges):
        if not any(e):
            continue
        if sum(k * math.log(v) for k, v in zip(e, p)) > math.log(x) + 1e-9:
            continue
        val = 1.0
        for k, v in zip(e, p):
            val *= v ** k
        if val <= x:
            out.append(val)
    return np.sort(np.array(out))


def brute_force_dfs(P: GeneralizedPrimeSystem, x: float) -> np.ndarray:
    """All multiset products <= x by depth-first search over nondecreasing prime indices.

    Cost is proportional to the output size, so primes close to 1 are fine as
    long as the number of products stays moderate.
    """
    p = [float(v) for v in P.primes if v <= x]
    out = []
    stack = [(1.0, 0)]
    while stack:
        val, i = stack.pop()
        for j in range(i, len(p)):
            nv = val * p[j]
            if nv > x:
                break
            out.append(nv)
            stack.append((nv, j))
    return np.sort(np.array(out, dtype=float))


def riemann_pi(P: GeneralizedPrimeSystem, x):
    """Pi(x) = sum_n pi(x^{1/n})/n, a finite sum.  Vectorized in x."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 1):
        raise ValueError("x must be >= 1")
    if len(P) == 0:
        return np.zeros_like(xa) if xa.ndim else 0.0
    p1 = P.primes[0]
    nmax = int(math.floor(math.log(max(float(xa.max()), 1.0)) / math.log(p1))) + 1
    out = np.zeros_like(xa)
    for n in range(1, nmax + 1):
        out = out + count_pi(P, xa ** (1.0 / n)) / n
    return float(out) if out.ndim == 0 else out


# -- measure exponential ----------------------------------------------------

@dataclass(frozen=True)
class VolterraSolution:
    """Density a of dN(e^u) on the grid u_n = n*h, 0 <= u_n <= max_u.

    Stored in the scaled form ``a_scaled = a * exp(-u)`` which stays bounded.
    """

    h: float
    max_u: float
    a_scaled: np.ndarray = field(repr=False)

    @property
    def u(self) -> np.ndarray:
        return np.arange(len(self.a_scaled)) * self.h

    @property
    def a_density(self) -> np.ndarray:
        return self.a_scaled * np.exp(self.u)

    def _cum_scaled(self) -> np.ndarray:
        # exp(-u_n) * int_0^{u_n} a(v) dv at the nodes, by cumulative Simpson
        u = self.u
        f = self.a_scaled * np.exp(u - u[-1])
        cum = cumulative_simpson(f, dx=self.h, initial=0.0)
        return cum * np.exp(u[-1] - u)

    def N(self, x):
        """N(x) = 1 + int_0^{log x} a(u) du; vectorized; linear-in-cell a_scaled."""
        xa = np.asarray(x, dtype=float)
        U = np.log(xa)
        if np.any(U < 0) or np.any(U > self.max_u + 1e-12):
            raise ValueError("x outside the solved range")
        cum = self._cached_cum()
        k = np.minimum((U / self.h).astype(np.int64), len(self.a_scaled) - 2)
        d = U - k * self.h
        s0, s1 = self.a_scaled[k], self.a_scaled[k + 1]
        slope = (s1 - s0) / self.h
        # int_0^d (s0 + slope*t) e^t dt
        ed = np.expm1(d)
        part = s0 * ed + slope * (d * np.exp(d) - ed)
        out = 1.0 + np.exp(k * self.h) * (cum[k] + part)
        return float(out) if out.ndim == 0 else out

    def N_scaled(self, u):
        """exp(-u) * N(e^u) on arbitrary u."""
        u = np.asarray(u, dtype=float)
        return self.N(np.exp(u)) * np.exp(-u)

    def _cached_cum(self) -> np.ndarray:
        c = self.__dict__.get("_cum_cache")
        if c is None:
            c = self._cum_scaled()
            object.__setattr__(self, "_cum_cache", c)
        return c


def _sample(b, max_u: float, h: float) -> np.ndarray:
    n = int(round(max_u / h))
    if abs(n * h - max_u) > 1e-9 * max(1.0, max_u):
        raise ValueError("max_u must be a multiple of h")
    u = np.arange(n + 1) * h
    if callable(b):
        vals = np.asarray(b(u), dtype=float)
    else:
        vals = np.asarray(b, dtype=float)
        if vals.shape != u.shape:
            raise ValueError(f"density samples must have length {n + 1}")
    return vals


def _volterra_trapezoid(bs: np.ndarray, h: float) -> np.ndarray:
    u = np.arange(len(bs)) * h
    c = u * bs
    a = np.empty_like(bs)
    a[0] = bs[0]
    for n in range(1, len(bs)):
        conv = np.dot(a[n - 1:0:-1], c[1:n]) + 0.5 * a[0] * c[n]
        a[n] = h * conv / u[n] + bs[n]
    return a


def exp_star(b: Callable | np.ndarray, max_u: float, h: float = 1e-3,
             b0: float | None = None, extrapolate: bool = False) -> VolterraSolution:
    """Solve u a(u) = int_0^u a(u-v) v b(v) dv + u b(u) on [0, max_u].

    Parameters
    ----------
    b : callable or array
        Density of dPi(e^u) in u, or its samples on ``arange(n+1)*h``.
    max_u, h : float
        Grid extent and step.
    b0 : float, optional
        Value b(0+) used at the origin (default: the sample at 0).
    extrapolate : bool
        If True (callable ``b`` only), also solve with step h/2 and combine
        the two solutions by Richardson extrapolation on the coarse grid.

    Notes
    -----
    Works with the scaled densities b e^{-u}, a e^{-u}, which satisfy the same
    equation; explicit trapezoid stepping, O(n^2).
    """
    if h <= 0 or max_u <= 0:
        raise ValueError("h and max_u must be positive")
    raw = _sample(b, max_u, h)
    if np.any(raw < 0):
        raise ValueError("density must be nonnegative")
    u = np.arange(len(raw)) * h
    bs = raw * np.exp(-u)
    if b0 is not None:
        bs[0] = b0
    a = _volterra_trapezoid(bs, h)
    if extrapolate:
        if not callable(b):
            raise ValueError("extrapolation needs a callable density")
        uf = np.arange(2 * len(raw) - 1) * (h / 2)
        bf = np.asarray(b(uf), dtype=float) * np.exp(-uf)
        if b0 is not None:
            bf[0] = b0
        af = _volterra_trapezoid(bf, h / 2)
        a = (4.0 * af[::2] - a) / 3.0
    return VolterraSolution(h, float(u[-1]), a)


def exp_series(b: Callable, max_u: float, h: float, terms: int = 12):
    """Independent check: N(e^U) from sum_{n<=terms} b^{*n}/n! on the grid.

    Convolutions are Riemann sums via FFT on the scaled densities; returns
    ``(u, N)`` with N integrated by the trapezoid rule in e^u-weighted form.
    """
    n = int(round(max_u / h))
    u = np.arange(n + 1) * h
    bs = np.asarray(b(u), dtype=float) * np.exp(-u)
    total = bs.copy()
    term = bs.copy()
    for k in range(2, terms + 1):
        conv = fftconvolve(term, bs)[: n + 1] * h
        conv -= 0.5 * h * (term[0] * bs + bs[0] * term)  # trapezoid endpoints
        term = conv / k
        total += term
    f = total * np.exp(u)
    N = 1.0 + np.concatenate([[0.0], np.cumsum(0.5 * h * (f[1:] + f[:-1]))])
    return u, N


# -- Riesz means ------------------------------------------------------------

@dataclass(frozen=True)
class RieszSpec:
    m: int
    a: float
    gamma_target: float = 0.0

    def __post_init__(self):
        if self.m < 0 or int(self.m) != self.m:
            raise ValueError("m must be a nonnegative integer")
        if not self.a > 0:
            raise ValueError("a must be positive")


def _kernel_log(y, m: int):
    """G_m(y) = int_y^1 (1-s)^m / s ds for 0 < y <= 1."""
    y = np.asarray(y, dtype=float)
    out = -np.log(y)
    for j in range(1, m + 1):
        out = out + binom(m, j) * (-1) ** j * (-np.expm1(j * np.log(y))) / j
    return out


def riesz_mean(N: IntegerAtoms | VolterraSolution, spec: RieszSpec, x):
    """int_1^x (N(t) - a t)/t (1 - t/x)^m dt, vectorized in x.

    For atoms the integral is exact: every atom n (and the unit) contributes
    ``w_n * G_m(n/x)``.  For continuous solutions Simpson quadrature in
    u = log t is used.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 1):
        raise ValueError("x must be >= 1")
    m, a = spec.m, spec.a
    lin = a * xa * np.exp((m + 1) * np.log1p(-1.0 / xa)) / (m + 1)
    if isinstance(N, IntegerAtoms):
        if np.any(xa > N.limit):
            raise ValueError("x beyond the enumerated range")
        out = _atoms_riesz(N, xa, m) - lin
    elif isinstance(N, VolterraSolution):
        if np.any(np.log(xa) > N.max_u + 1e-12):
            raise ValueError("x beyond the solved range")
        out = np.array([_volterra_riesz(N, float(X), m) for X in xa]) - lin
    else:
        raise TypeError("N must be IntegerAtoms or VolterraSolution")
    return float(out[0]) if np.ndim(x) == 0 else out


def _atoms_riesz(N: IntegerAtoms, xa: np.ndarray, m: int) -> np.ndarray:
    v, w = N.values, N.weights.astype(float)
    k = np.searchsorted(v, xa, side="right")
    W = np.concatenate([[0.0], np.cumsum(w)])
    L = np.concatenate([[0.0], np.cumsum(w * np.log(v))])
    logx = np.log(xa)
    out = logx + (W[k] * logx - L[k])  # unit + atoms, the -log(n/x) part
    for j in range(1, m + 1):
        Pj = np.concatenate([[0.0], np.cumsum(w * (v / v[-1]) ** j)]) if v.size else np.zeros(1)
        scale = (v[-1] / xa) ** j if v.size else np.zeros_like(xa)
        unit = 1.0 - xa ** (-float(j))
        out = out + binom(m, j) * (-1) ** j / j * (unit + W[k] - Pj[k] * scale)
    return out


def _volterra_riesz(sol: VolterraSolution, X: float, m: int) -> float:
    U = math.log(X)
    if U == 0:
        return 0.0
    n = max(2, int(math.ceil(U / sol.h)))
    n += n % 2
    u = np.linspace(0.0, U, n + 1)
    f = sol.N(np.exp(u)) * (-np.expm1(u - U)) ** m
    return float(simpson(f, x=u))


# -- Kahane partial integral --------------------------------------------------

def _kahane_piece(c, a, u0, u1):
    """int_{u0}^{u1} (c e^{-u} - a)^2 u^2 du by 8-point Gauss-Legendre (vectorized)."""
    mid, half = 0.5 * (u0 + u1), 0.5 * (u1 - u0)
    uu = mid[:, None] + half[:, None] * _GL8_X[None, :]
    g = (c[:, None] * np.exp(-uu) - a) * uu
    return half * ((g * g) @ _GL8_W)


def kahane_partial(N: IntegerAtoms, a: float, X, chunk: int = 1 << 20):
    """int_1^X |(N(t) - a t) log t / t|^2 dt/t, vectorized and nondecreasing in X.

    N is constant between consecutive atoms; on each such segment the
    integrand in u = log t is smooth and is integrated with 8-point
    Gauss-Legendre.  Long segments are split at integer u.
    """
    Xa = np.atleast_1d(np.asarray(X, dtype=float))
    if np.any(Xa < 1):
        raise ValueError("X must be >= 1")
    if np.any(Xa > N.limit):
        raise ValueError("X beyond the enumerated range")
    Umax = float(np.log(Xa.max()))
    logv = np.log(N.values[N.values <= Xa.max()])
    vals = np.unique(logv)
    brk = np.union1d(np.union1d(vals, np.arange(0.0, Umax, 0.5)), [0.0])
    brk = brk[(brk < Umax) | (brk == 0.0)]
    ends = np.append(brk[1:], Umax)
    # N is right-continuous: on [brk_k, brk_{k+1}) it equals N(e^{brk_k})
    cvals = 1.0 + N._cum[np.searchsorted(logv, brk, side="right")].astype(float)
    pieces = np.empty(len(brk))
    for s in range(0, len(brk), chunk):
        sl = slice(s, s + chunk)
        pieces[sl] = _kahane_piece(cvals[sl], a, brk[sl], ends[sl])
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    U = np.log(Xa)
    k = np.searchsorted(brk, U, side="right") - 1
    k = np.clip(k, 0, len(brk) - 1)
    part = _kahane_piece(cvals[k], a, brk[k], U)
    out = cum[k] + part
    return float(out[0]) if np.ndim(X) == 0 else out


def kahane_partial_continuous(sol: VolterraSolution, a: float, X) -> np.ndarray:
    """Same integral for a continuous N given by a Volterra solution (Simpson in u)."""
    u = sol.u
    g = (sol.N_scaled(u) - a) * u
    cum = cumulative_simpson(g * g, x=u, initial=0.0)
    return np.interp(np.log(np.atleast_1d(X)), u, cum)


# -- density constant from the data ----------------------------------------

def tail_mean(N: IntegerAtoms, lo: float, hi: float) -> float:
    """Logarithmic mean of N(t)/t over [lo, hi]: int N(t) dt/t^2 / log(hi/lo), exact."""
    if not 1 <= lo < hi:
        raise ValueError("need 1 <= lo < hi")
    if hi > N.limit:
        raise ValueError("hi beyond the enumerated range")
    k = np.searchsorted(N.values, hi, side="right")
    v, w = N.values[:k], N.weights[:k].astype(float)
    s = np.sum(w * (1.0 / np.maximum(v, lo) - 1.0 / hi)) + (1.0 / lo - 1.0 / hi)
    return float(s / math.log(hi / lo))


def tail_mean_estimate(N: IntegerAtoms, hi: float, decades: float = 1.0) -> tuple[float, float]:
    """Tail mean over the top ``decades`` below ``hi`` and a spread-based error.

    The error is the difference between the means of the two halves (in log
    scale) of the window.
    """
    lo = hi / 10 ** decades
    mid = math.sqrt(lo * hi)
    m = tail_mean(N, lo, hi)
    return m, abs(tail_mean(N, mid, hi) - tail_mean(N, lo, mid))
