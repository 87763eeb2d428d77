"""Ordinary number-theory helpers: rational primes, Li(x), smooth-number counts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

DEFAULT_SEGMENT = 1 << 20
SPF_LIMIT = 10**7


class EmptyTableError(ValueError):
    pass


@dataclass(frozen=True)
class PrimeTable:
    """Immutable ascending table of rational primes up to ``limit``."""

    limit: int
    primes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.primes.setflags(write=False)

    def __len__(self):
        return len(self.primes)

    def count_upto(self, x: float) -> int:
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def count_in(self, lo: int, hi: int) -> int:
        """Number of primes p with lo <= p < hi."""
        return int(np.searchsorted(self.primes, hi, side="left")
                   - np.searchsorted(self.primes, lo, side="left"))

    def verify(self, sample: int | None = None, seed: int = 0) -> bool:
        """Trial-division check of all (or ``sample`` random) entries."""
        ps = self.primes
        if sample is not None and sample < len(ps):
            rng = np.random.default_rng(seed)
            ps = rng.choice(ps, size=sample, replace=False)
        return all(is_prime_trial(int(p)) for p in ps)


def is_prime_trial(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    f = 3
    while f <= r:
        if n % f == 0:
            return False
        f += 2
    return True


def _small_sieve(n: int) -> np.ndarray:
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_p[p]:
            is_p[p * p::p] = False
    return np.flatnonzero(is_p)


def sieve(limit: int, segment: int = DEFAULT_SEGMENT) -> PrimeTable:
    """Segmented sieve of Eratosthenes.

    Parameters
    ----------
    limit : int
        Inclusive upper bound, at least 2.
    segment : int
        Number of integers sieved per segment.
    """
    limit = int(limit)
    if limit < 2:
        raise EmptyTableError(f"no primes <= {limit}")
    base = _small_sieve(math.isqrt(limit))
    chunks = []
    lo = 2
    while lo <= limit:
        hi = min(lo + segment, limit + 1)
        mark = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            mark[start - lo::p] = False
        chunks.append(np.flatnonzero(mark) + lo)
        lo = hi
    return PrimeTable(limit, np.concatenate(chunks).astype(np.int64))


def li(x: float) -> float:
    """Offset logarithmic integral, the integral of 1/log t from 2 to x."""
    if x < 2:
        raise ValueError(f"li defined for x >= 2, got {x}")
    if x == 2:
        return 0.0
    return float(special.expi(math.log(x)) - special.expi(math.log(2.0)))


def li_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 2):
        raise ValueError("li defined for x >= 2")
    return special.expi(np.log(x)) - special.expi(math.log(2.0))


@dataclass(frozen=True)
class SmoothCountQuery:
    x: float
    y: float

    def __post_init__(self):
        if self.x < 1 or self.y < 1:
            raise ValueError("smooth-count query needs x >= 1 and y >= 1")


@lru_cache(maxsize=4)
def _largest_prime_factor(n: int) -> np.ndarray:
    lpf = np.ones(n + 1, dtype=np.int64)
    for p in _small_sieve(n):
        lpf[p::p] = p  # ascending p, so the last write is the largest factor
    return lpf


def psi_smooth(q: SmoothCountQuery, table: PrimeTable) -> int:
    """Exact count of n <= x whose prime factors are all <= y (n = 1 counts)."""
    x, y = int(math.floor(q.x)), q.y
    if y >= x:
        return x
    if table.limit < min(y, x):
        raise ValueError(f"prime table limit {table.limit} below y={y}")
    if x <= SPF_LIMIT:
        lpf = _largest_prime_factor(10 ** max(3, math.ceil(math.log10(x))))
        return int(np.count_nonzero(lpf[1:x + 1] <= y))
    ps = table.primes[table.primes <= y]
    return _psi_rec(x, len(ps), tuple(int(p) for p in ps))


def _psi_rec(x: int, k: int, ps: tuple) -> int:
    # group n <= x by its largest prime factor p = ps[j]: n = p*m, P(m) <= p
    if x < 1:
        return 0
    if k and ps[k - 1] >= x:
        return x
    total = 1
    for j in range(k):
        p = ps[j]
        if p > x:
            break
        total += _psi_rec(x // p, j + 1, ps)
    return total


def psi_estimate(x: float, y: float) -> float:
    """Shape x * exp(-log x / (2 log y)) * log y with unit constant."""
    if x < 2 or y < 2:
        raise ValueError("psi_estimate needs x >= 2 and y >= 2")
    return x * math.exp(-math.log(x) / (2 * math.log(y))) * math.log(y)


def psi_constant(table: PrimeTable, xs, ys) -> float:
    """Empirical constant: max of Psi(x, y) / psi_estimate(x, y) over the grid."""
    return max(psi_smooth(SmoothCountQuery(int(x), int(y)), table) / psi_estimate(x, y)
               for x in xs for y in ys)
