"""Discrete generalized prime systems: generation, counting and elementary checks."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .continuous import ContinuousSystem

SOURCES = ("P_alpha", "P_star", "rational", "custom")
_BIN_MAGIC = b"BPRIMES1\n"


@dataclass(frozen=True)
class GeneralizedPrimeSystem:
    """Nondecreasing finite sequence of real primes > 1, kept with multiplicity.

    Attributes
    ----------
    primes : ndarray
        Sorted float64 array (read-only).
    source : str
        One of ``SOURCES``.
    alpha : float or None
        Exponent of the generating continuous system, if any.
    tolerance : float
        Tolerance used to produce the entries (0 for exact systems).
    """

    primes: np.ndarray = field(repr=False)
    source: str = "custom"
    alpha: float | None = None
    tolerance: float = 0.0

    def __post_init__(self):
        p = np.array(self.primes, dtype=float)
        if p.ndim != 1:
            raise ValueError("primes must be one-dimensional")
        if p.size and not np.all(np.isfinite(p)):
            raise ValueError("primes must be finite")
        if p.size and p[0] <= 1:
            raise ValueError("generalized primes must exceed 1")
        if np.any(np.diff(p) < 0):
            raise ValueError("primes must be nondecreasing")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        p.setflags(write=False)
        object.__setattr__(self, "primes", p)

    @property
    def count(self) -> int:
        return len(self.primes)

    def __len__(self):
        return len(self.primes)

    @classmethod
    def from_values(cls, values, source: str = "custom") -> "GeneralizedPrimeSystem":
        return cls(np.sort(np.asarray(values, dtype=float)), source=source)

    def header(self) -> dict:
        return {"source": self.source, "alpha": self.alpha, "count": self.count,
                "tolerance": self.tolerance}


def generate(sys: ContinuousSystem, count: int) -> GeneralizedPrimeSystem:
    """The discretization p_r = Pi_C^{-1}(r), r = 1..count."""
    count = int(count)
    if count < 1:
        raise ValueError("count must be at least 1")
    ps = sys.inverse_many(np.arange(1, count + 1, dtype=float))
    return GeneralizedPrimeSystem(ps, source="P_alpha", alpha=sys.alpha, tolerance=1e-9)


def count_pi(P: GeneralizedPrimeSystem, x):
    """pi(x), right-continuous, counting multiplicity.  Vectorized in x."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("x must be nonnegative")
    out = np.searchsorted(P.primes, xa, side="right")
    return int(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SandwichReport:
    lower: float
    upper: float
    n_points: int

    def holds(self, slack: float = 1e-6) -> bool:
        return self.lower >= -slack and self.upper <= 1 + slack


def sandwich_check(P: GeneralizedPrimeSystem, sys: ContinuousSystem,
                   grid_per_gap: int = 4) -> SandwichReport:
    """Extremes of Pi_C(x) - pi(x) over x in [p_1, p_count].

    Each gap is sampled at its endpoints (left limits included) and at
    ``grid_per_gap`` interior points.
    """
    p = P.primes
    if len(p) == 0:
        raise ValueError("empty system")
    at_p = sys.pi_c(p)
    r = count_pi(P, p)
    lo = float(np.min(at_p - r))
    hi = float(np.max(at_p - (r - _multiplicity_at(p))))  # left limits
    if len(p) > 1 and grid_per_gap > 0:
        frac = np.arange(1, grid_per_gap + 1) / (grid_per_gap + 1)
        xs = (p[:-1, None] + frac[None, :] * np.diff(p)[:, None]).ravel()
        d = sys.pi_c(xs) - count_pi(P, xs)
        lo, hi = min(lo, float(d.min())), max(hi, float(d.max()))
    return SandwichReport(lo, hi, len(p) * (grid_per_gap + 2))


def _multiplicity_at(p: np.ndarray) -> np.ndarray:
    return np.searchsorted(p, p, side="right") - np.searchsorted(p, p, side="left")


@dataclass(frozen=True)
class GapReport:
    violations: np.ndarray
    threshold: int

    @property
    def count(self) -> int:
        return len(self.violations)


def gap_check(P: GeneralizedPrimeSystem) -> GapReport:
    """Indices r (1-based) with p_{r+1} - p_r >= p_r^{2/3} log p_r.

    ``threshold`` is one past the last violating index, so every r >= threshold
    satisfies the bound within the generated range.
    """
    p = P.primes
    if len(p) < 2:
        return GapReport(np.zeros(0, dtype=np.int64), 1)
    gaps = np.diff(p)
    bound = p[:-1] ** (2.0 / 3.0) * np.log(p[:-1])
    bad = np.flatnonzero(gaps >= bound) + 1
    thr = int(bad[-1]) + 1 if bad.size else 1
    return GapReport(bad.astype(np.int64), thr)


@dataclass(frozen=True)
class MertensFit:
    M_hat: float
    residuals: list

    def scaled_residuals(self, alpha: float) -> np.ndarray:
        x, r = np.array(self.residuals).T
        return r * np.log(x) ** alpha


def reciprocal_sum(P: GeneralizedPrimeSystem, x):
    """Sum of 1/p over p <= x (vectorized)."""
    cs = np.concatenate([[0.0], np.cumsum(1.0 / P.primes)])
    return cs[count_pi(P, x)]


def mertens_fit(P: GeneralizedPrimeSystem, grid) -> MertensFit:
    """Fit M in sum_{p<=x} 1/p = log log x + M by the median over the upper half of ``grid``."""
    g = np.sort(np.asarray(grid, dtype=float))
    if g.size == 0:
        raise ValueError("empty grid")
    if g[0] <= math.e or g[-1] > P.primes[-1]:
        raise ValueError(f"grid must lie in (e, {P.primes[-1]}]")
    dev = reciprocal_sum(P, g) - np.log(np.log(g))
    M = float(np.median(dev[len(g) // 2:]))
    return MertensFit(M, [(float(x), float(d - M)) for x, d in zip(g, dev)])


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite list of atoms (position > 1, real weight), sorted by position."""

    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if pos.shape != w.shape:
            raise ValueError("positions and weights differ in shape")
        if pos.size and pos.min() <= 1:
            raise ValueError("atoms must sit at positions > 1")
        order = np.argsort(pos, kind="stable")
        object.__setattr__(self, "positions", pos[order])
        object.__setattr__(self, "weights", w[order])

    def cumulative(self, x):
        cs = np.concatenate([[0.0], np.cumsum(self.weights)])
        return cs[np.searchsorted(self.positions, x, side="right")]


def prime_power_measure(P: GeneralizedPrimeSystem, X: float) -> AtomicMeasure:
    """Atoms of dPi on [1, X]: p^k with weight 1/k."""
    pos, w = [], []
    p = P.primes[P.primes <= X]
    k = 1
    while p.size:
        pos.append(p ** k)
        w.append(np.full(p.size, 1.0 / k))
        k += 1
        p = p[p ** k <= X]
    if not pos:
        return AtomicMeasure(np.zeros(0), np.zeros(0))
    return AtomicMeasure(np.concatenate(pos), np.concatenate(w))


# -- serialization ----------------------------------------------------------

def _atomic_write(path, data: bytes) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def save_csv(P: GeneralizedPrimeSystem, path) -> None:
    head = json.dumps(P.header(), sort_keys=True)
    lines = ["# schema_version=1", f"# {head}", "index,prime"]
    lines += [f"{i},{v:.17g}" for i, v in enumerate(P.primes, start=1)]
    _atomic_write(path, ("\n".join(lines) + "\n").encode())


def load_csv(path) -> GeneralizedPrimeSystem:
    meta = {}
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# {"):
                meta = json.loads(line[2:])
            elif line and not line.startswith("#") and line != "index,prime":
                vals.append(float(line.split(",")[1]))
    return GeneralizedPrimeSystem(np.array(vals), source=meta.get("source", "custom"),
                                  alpha=meta.get("alpha"), tolerance=meta.get("tolerance", 0.0))


def save_binary(P: GeneralizedPrimeSystem, path) -> None:
    head = json.dumps(dict(P.header(), schema_version=1), sort_keys=True).encode()
    body = np.ascontiguousarray(P.primes, dtype="<f8").tobytes()
    _atomic_write(path, _BIN_MAGIC + head + b"\n" + body)


def load_binary(path) -> GeneralizedPrimeSystem:
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(_BIN_MAGIC):
        raise ValueError("not a prime-list binary file")
    rest = raw[len(_BIN_MAGIC):]
    nl = rest.index(b"\n")
    meta = json.loads(rest[:nl])
    p = np.frombuffer(rest[nl + 1:], dtype="<f8").astype(float)
    if len(p) != meta["count"]:
        raise ValueError("truncated prime-list file")
    return GeneralizedPrimeSystem(p, source=meta["source"], alpha=meta["alpha"],
                                  tolerance=meta["tolerance"])
