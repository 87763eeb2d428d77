"""Block construction of a generalized prime system by doubling and removing rational primes.

Around each seed x_i four adjacent integer intervals I_1 < I_2 < I_3 < I_4 are
chosen.  For odd i the primes of I_1 and I_3 are removed and those of I_2 and
I_4 doubled; for even i the roles swap.  I_1 and I_4 are grown in lockstep so
that the Euler product over all built blocks stays within O(1/x_i) of 1.

All intervals are half-open integer ranges [lo, hi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classical import PrimeTable
from .primes import GeneralizedPrimeSystem


class BlockConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class BlockConfig:
    x1: int = 100_000
    k_max: int = 3
    density_check: bool = True
    balance_tol_scale: float = 1.0

    def __post_init__(self):
        if self.x1 < 3:
            raise ValueError("x1 must be at least 3")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if not self.balance_tol_scale > 0:
            raise ValueError("balance_tol_scale must be positive")


def next_seed(x: int) -> int:
    """floor(2^{x^{1/4}})."""
    return int(math.floor(2.0 ** (x ** 0.25)))


@dataclass(frozen=True)
class Block:
    index: int
    x: int
    intervals: tuple          # four (lo, hi) pairs
    counts: tuple             # prime counts per interval
    balance: float            # signed log Euler product over blocks 1..index
    density_ok: bool | None = None

    @property
    def index_bound_ok(self) -> bool:
        """Whether i < log^{1/6} x_i, an assumption that fails at small seeds."""
        return self.index < math.log(self.x) ** (1 / 6)

    @property
    def x_minus(self) -> int:
        return self.intervals[0][0]

    @property
    def x_plus(self) -> int:
        return self.intervals[3][1] - 1

    @property
    def doubled(self) -> tuple:
        return (1, 3) if self.index % 2 else (0, 2)

    @property
    def removed(self) -> tuple:
        return (0, 2) if self.index % 2 else (1, 3)

    def to_dict(self) -> dict:
        return {"index": self.index, "x": self.x, "intervals": [list(iv) for iv in self.intervals],
                "counts": list(self.counts), "balance": self.balance,
                "balance_scaled": self.balance * self.x, "density_ok": self.density_ok,
                "index_bound_ok": self.index_bound_ok}


@dataclass(frozen=True)
class BlockIntervals:
    blocks: tuple
    config: BlockConfig | None = None
    stop_reason: str | None = None

    def __len__(self):
        return len(self.blocks)

    def prefix(self, k: int) -> "BlockIntervals":
        return BlockIntervals(self.blocks[:k], self.config)

    def verify(self, table: PrimeTable | None = None) -> list:
        """Re-check the interval invariants; returns a list of failure messages."""
        bad = []
        prev_hi = 0
        for b in self.blocks:
            iv = b.intervals
            if iv[0][1] != b.x or iv[1][0] != b.x:
                bad.append(f"block {b.index}: I_1/I_2 do not meet at x")
            for j in range(3):
                if iv[j][1] != iv[j + 1][0]:
                    bad.append(f"block {b.index}: I_{j + 1} and I_{j + 2} not contiguous")
            if iv[0][0] < prev_hi:
                bad.append(f"block {b.index}: overlaps previous block")
            if b.counts[0] != b.counts[3] or b.counts[1] != b.counts[2]:
                bad.append(f"block {b.index}: unequal paired prime counts")
            if table is not None:
                real = tuple(table.count_in(lo, hi) for lo, hi in iv)
                if real != tuple(b.counts):
                    bad.append(f"block {b.index}: recorded counts differ from table")
            prev_hi = iv[3][1]
        return bad

    def prime_status(self, p: np.ndarray) -> np.ndarray:
        """+1 doubled, -1 removed, 0 untouched for an array of rational primes."""
        p = np.asarray(p)
        out = np.zeros(p.shape, dtype=np.int8)
        for b in self.blocks:
            for j, (lo, hi) in enumerate(b.intervals):
                sel = (p >= lo) & (p < hi)
                out[sel] = 1 if j in b.doubled else -1
        return out

    def modified_primes(self, table: PrimeTable, limit: float | None = None):
        """(primes, status) for all primes lying in some interval (and <= limit)."""
        ps, st = [], []
        for b in self.blocks:
            for j, (lo, hi) in enumerate(b.intervals):
                q = table.primes[(table.primes >= lo) & (table.primes < hi)]
                if limit is not None:
                    q = q[q <= limit]
                ps.append(q)
                st.append(np.full(q.size, 1 if j in b.doubled else -1, dtype=np.int8))
        if not ps:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int8)
        p = np.concatenate(ps)
        order = np.argsort(p)
        return p[order], np.concatenate(st)[order]

    def to_dict(self) -> dict:
        return {"schema_version": 1, "blocks": [b.to_dict() for b in self.blocks],
                "stop_reason": self.stop_reason}


def _log_factor(p: np.ndarray) -> np.ndarray:
    return np.log1p(-1.0 / p.astype(float))


def density_holds(x: int, table: PrimeTable) -> bool:
    """[x, x + x/log^{1/3} x] holds more than x/(2 log^{4/3} x) primes."""
    L = math.log(x)
    hi = int(math.floor(x + x / L ** (1 / 3)))
    return table.count_in(x, hi + 1) > x / (2 * L ** (4 / 3))


def build_blocks(cfg: BlockConfig, table: PrimeTable, strict: bool = False) -> BlockIntervals:
    """Greedy construction of up to k_max blocks starting from x_1 = cfg.x1.

    Blocks must be disjoint.  When seeds are so close that a balanced block
    would reach into its predecessor, the build stops there and the reason is
    kept in ``stop_reason`` (or ``BlockConstructionError`` is raised if
    ``strict``).
    """
    primes = table.primes
    blocks = []
    S = 0.0
    x = int(cfg.x1)
    prev_hi = 0
    for i in range(1, cfg.k_max + 1):
        if i > 1:
            x = next_seed(x)
        L = math.log(x)
        e2 = int(math.floor(x + x / L ** (1 / 3))) + 1
        if e2 > table.limit:
            reason = f"sieve limit {table.limit} too small for block {i} at x={x}"
            if strict or not blocks:
                raise BlockConstructionError(reason)
            return BlockIntervals(tuple(blocks), cfg, reason)
        dens = None
        if cfg.density_check:
            dens = density_holds(x, table)
            if not dens:
                raise BlockConstructionError(f"density check fails at x={x}")
        i2 = primes[(primes >= x) & (primes < e2)]
        k2 = i2.size
        j0 = int(np.searchsorted(primes, e2, side="left"))
        if j0 + k2 >= primes.size:
            raise BlockConstructionError("sieve exhausted while placing I_3")
        i3 = primes[j0:j0 + k2]
        e3 = int(i3[-1]) + 1 if k2 else e2
        sign = 1.0 if i % 2 else -1.0
        base = S + sign * (_log_factor(i3).sum() - _log_factor(i2).sum())
        # candidate primes for I_1 (downward from x) and I_4 (upward from e3)
        lo_idx = int(np.searchsorted(primes, x, side="left"))
        hi_idx = int(np.searchsorted(primes, e3, side="left"))
        down = primes[:lo_idx][::-1]
        up = primes[hi_idx:]
        n = min(down.size, up.size)
        step = sign * (_log_factor(down[:n]) - _log_factor(up[:n]))
        path = base + np.concatenate([[0.0], np.cumsum(step)])
        flip = np.flatnonzero(np.sign(path[1:]) != np.sign(path[0]))
        if path[0] == 0.0:
            j = 0
        elif flip.size == 0:
            raise BlockConstructionError(f"balancing infeasible within table range at block {i}")
        else:
            c = flip[0] + 1
            j = c if abs(path[c]) < abs(path[c - 1]) else c - 1
        a1 = int(down[j - 1]) if j else x
        if a1 < prev_hi:
            reason = (f"block {i} at x={x} needs I_1 down to {a1}, below the end "
                      f"{prev_hi - 1} of block {i - 1}")
            if strict:
                raise BlockConstructionError(reason)
            return BlockIntervals(tuple(blocks), cfg, reason)
        S = float(path[j])
        e4 = int(up[j - 1]) + 1 if j else e3
        ivs = ((a1, x), (x, e2), (e2, e3), (e3, e4))
        counts = (int(j), int(k2), int(k2), int(j))
        blocks.append(Block(i, x, ivs, counts, S, dens))
        prev_hi = e4
    return BlockIntervals(tuple(blocks), cfg)


def balance_ok(blocks: BlockIntervals, scale: float = 1.0) -> list:
    """Per block: |signed log product| <= scale / x_i."""
    return [abs(b.balance) <= scale / b.x for b in blocks.blocks]


def build_pstar(blocks: BlockIntervals, table: PrimeTable, limit: float) -> GeneralizedPrimeSystem:
    if limit > table.limit:
        raise ValueError("limit beyond the prime table")
    p = table.primes[table.primes <= limit]
    st = blocks.prime_status(p)
    mult = np.where(st == 1, 2, np.where(st == -1, 0, 1))
    vals = np.repeat(p, mult).astype(float)
    return GeneralizedPrimeSystem(vals, source="P_star")


# -- multiplicative functions -------------------------------------------------

def f_values(blocks: BlockIntervals, table: PrimeTable, X: int) -> np.ndarray:
    """f(n) for 0 <= n <= X (f(0) = 0): number of representations as products of P* elements."""
    X = int(X)
    if X > table.limit:
        raise ValueError("X beyond the prime table")
    f = np.ones(X + 1, dtype=np.int64)
    f[0] = 0
    ps, st = blocks.modified_primes(table, X)
    for p, s in zip(ps.tolist(), st.tolist()):
        if s < 0:
            f[p::p] = 0
        else:
            f[p::p] *= 2
            a, pk = 2, p * p
            while pk <= X:
                f[pk::pk] = f[pk::pk] // a * (a + 1)
                a += 1
                pk *= p
    return f


def f_sum(f: np.ndarray, x) -> np.ndarray:
    """N(x) = sum_{n<=x} f(n) for values from ``f_values``."""
    cs = np.cumsum(f)
    xi = np.floor(np.asarray(x, dtype=float)).astype(np.int64)
    if np.any(xi >= len(f)):
        raise ValueError("x beyond the computed range")
    out = cs[np.maximum(xi, 0)]
    return out


def g_prime_power(status: int, a: int) -> int:
    if status > 0:
        return 1
    if status < 0:
        return -1 if a == 1 else 0
    return 0


def h_members(blocks: BlockIntervals, table: PrimeTable, x: float):
    """All m <= x built from interval primes with g(m) != 0, and g(m).

    Returns sorted (m, g) integer arrays including m = 1.
    """
    x = int(math.floor(x))
    ps, st = blocks.modified_primes(table, x)
    r = math.isqrt(x)
    small = ps <= r
    m = np.array([1], dtype=np.int64)
    g = np.array([1], dtype=np.int64)
    for p, s in zip(ps[small].tolist(), st[small].tolist()):
        new_m, new_g = [m], [g]
        pk, a = p, 1
        while pk <= x:
            sel = m <= x // pk
            if not sel.any():
                break
            gp = g_prime_power(s, a)
            if gp:
                new_m.append(m[sel] * pk)
                new_g.append(g[sel] * gp)
            if s < 0:
                break
            a += 1
            pk *= p
        m, g = np.concatenate(new_m), np.concatenate(new_g)
        order = np.argsort(m, kind="stable")
        m, g = m[order], g[order]
    # primes above sqrt(x) occur at most once, to the first power
    big_m, big_g = [m], [g]
    for p, s in zip(ps[~small].tolist(), st[~small].tolist()):
        k = int(np.searchsorted(m, x // p, side="right"))
        big_m.append(m[:k] * p)
        big_g.append(g[:k] * (1 if s > 0 else -1))
    m, g = np.concatenate(big_m), np.concatenate(big_g)
    order = np.argsort(m, kind="stable")
    return m[order], g[order]


def gh_identity_check(blocks: BlockIntervals, table: PrimeTable, f: np.ndarray, xs) -> np.ndarray:
    """sum_{n<=x} f(n) - sum_{m in H, m<=x} g(m) floor(x/m), per x (exact integers)."""
    xs = np.asarray(xs, dtype=np.int64)
    m, g = h_members(blocks, table, int(xs.max()))
    cs = np.cumsum(f)
    out = np.empty(xs.shape, dtype=np.int64)
    for i, x in enumerate(xs.tolist()):
        k = int(np.searchsorted(m, x, side="right"))
        out[i] = cs[x] - int(np.sum(g[:k] * (x // m[:k])))
    return out


def g_convolution_check(blocks: BlockIntervals, table: PrimeTable, f: np.ndarray) -> int:
    """Number of n <= len(f)-1 where f(n) != sum_{d|n} g(d)."""
    X = len(f) - 1
    m, g = h_members(blocks, table, X)
    h = np.zeros(X + 1, dtype=np.int64)
    for d, gd in zip(m.tolist(), g.tolist()):
        h[d::d] += gd
    return int(np.count_nonzero(h[1:] != f[1:]))


def g_values_dirichlet(f: np.ndarray, n_max: int) -> np.ndarray:
    """g = mu * f by direct divisor sums (small n only; independent of the block tables)."""
    mu = _mobius(n_max)
    g = np.zeros(n_max + 1, dtype=np.int64)
    for d in range(1, n_max + 1):
        if f[d]:
            g[d::d] += f[d] * mu[1: n_max // d + 1]
    return g


def _mobius(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    is_c = np.zeros(n + 1, dtype=bool)
    for p in range(2, n + 1):
        if not is_c[p]:
            is_c[2 * p::p] = True
            mu[p::p] *= -1
            mu[p * p::p * p] = 0
    return mu


@dataclass(frozen=True)
class TrendReport:
    x: np.ndarray
    n_scaled: np.ndarray        # (N(x) - x) log^{4/3} x / x
    mean_scaled: np.ndarray     # (Nbar(x) - x) log^{5/3 - eps} x / x
    pi_scaled: np.ndarray       # (pi(x) - x/log x) log^{4/3} x / (x log log x)
    eps: float = 1 / 6

    def excursion(self) -> tuple[float, float]:
        """Largest |N(x) - x| log^{4/3} x / x and where it occurs."""
        k = int(np.argmax(np.abs(self.n_scaled)))
        return float(abs(self.n_scaled[k])), float(self.x[k])


def pstar_trends(blocks: BlockIntervals, table: PrimeTable, f: np.ndarray, grid,
                 eps: float = 1 / 6) -> TrendReport:
    x = np.asarray(grid, dtype=float)
    if x.max() >= len(f):
        raise ValueError("grid beyond the computed range")
    L = np.log(x)
    N = f_sum(f, x).astype(float)
    n = np.arange(len(f), dtype=float)
    cs_f = np.cumsum(f.astype(float))
    cs_flog = np.cumsum(f * np.log(np.maximum(n, 1.0)))
    xi = np.floor(x).astype(np.int64)
    Nbar = cs_f[xi] * L - cs_flog[xi]           # sum f(n) log(x/n)
    ps = table.primes[table.primes <= x.max()]
    st = blocks.prime_status(ps)
    mult = np.where(st == 1, 2, np.where(st == -1, 0, 1))
    cm = np.concatenate([[0], np.cumsum(mult)])
    pi = cm[np.searchsorted(ps, x, side="right")]
    return TrendReport(x, (N - x) * L ** (4 / 3) / x,
                       (Nbar - x) * L ** (5 / 3 - eps) / x,
                       (pi - x / L) * L ** (4 / 3) / (x * np.log(L)), eps)


def toy_blocks() -> BlockIntervals:
    """A small hand-made configuration with products of modified primes below 10^4."""
    b1 = Block(1, 20, ((17, 20), (20, 24), (24, 30), (30, 32)), (2, 2, 2, 1), 0.0)
    b2 = Block(2, 50, ((41, 50), (50, 54), (54, 60), (60, 62)), (3, 1, 1, 1), 0.0)
    return BlockIntervals((b1, b2))
