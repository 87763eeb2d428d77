"""Acceptance checks at desk scale.

Each ``criterion_k`` returns a ``CriterionResult``; ``run_all`` runs them in
order.  ``quick=True`` shrinks every data size so the whole set finishes in
well under a minute (used by ``beurling verify-all --quick``); the verdicts in
quick mode are indicative only.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .classical import li_array, sieve
from .continuous import ContinuousSystem, log_density
from .counting import (
    EnumerationCapError, RieszSpec, brute_force_dfs, enumerate_integers, exp_series, exp_star,
    kahane_partial, riesz_mean, tail_mean_estimate,
)
from .diamond import diamond_constants, log_grid, oscillation_fit, phase_distance
from .primes import GeneralizedPrimeSystem, count_pi, gap_check, generate, sandwich_check
from .pstar import (
    BlockConfig, balance_ok, build_blocks, f_values, g_convolution_check, gh_identity_check,
    pstar_trends,
)
from .zeta import (
    EULER_GAMMA, K_derivative, K_derivative_parts, K_eval, KAsymptoticTerms, a_alpha,
)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0
    budget: float | None = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


class Context:
    """Lazily built shared data (generated systems and their enumerations)."""

    def __init__(self, quick: bool = False):
        self.quick = quick
        self.X = 10**5 if quick else 10**7
        self._sys = {}
        self._P = {}
        self._A = {}

    def system(self, alpha: float) -> ContinuousSystem:
        if alpha not in self._sys:
            self._sys[alpha] = ContinuousSystem(alpha)
        return self._sys[alpha]

    def primes_upto(self, alpha: float, X: float | None = None) -> GeneralizedPrimeSystem:
        X = X or self.X
        key = (alpha, X)
        if key not in self._P:
            s = self.system(alpha)
            n = int(math.floor(s.pi_c(X))) + 2
            self._P[key] = generate(s, n)
        return self._P[key]

    def atoms(self, alpha: float):
        if alpha not in self._A:
            self._A[alpha] = enumerate_integers(self.primes_upto(alpha), self.X)
        return self._A[alpha]

    def drop(self, alpha: float) -> None:
        self._A.pop(alpha, None)


def _timed(fn):
    def wrap(ctx: Context) -> CriterionResult:
        t = time.perf_counter()
        res = fn(ctx)
        res.seconds = time.perf_counter() - t
        if res.budget is not None and res.seconds > res.budget and not ctx.quick:
            res.passed = False
            res.detail += f"; runtime {res.seconds:.1f}s over budget {res.budget:.0f}s"
        return res
    wrap.__name__ = fn.__name__
    wrap.__doc__ = fn.__doc__
    return wrap


@_timed
def criterion_1(ctx: Context) -> CriterionResult:
    """K(1) = -gamma/alpha."""
    errs = {a: abs(K_eval(ctx.system(a), 1.0).value + EULER_GAMMA / a)
            for a in (1.0, 1.1, 1.25, 1.5, 2.0)}
    worst = max(errs.values())
    return CriterionResult(1, "K(1) = -gamma/alpha", worst <= 1e-8,
                           f"max error {worst:.2e} (tol 1e-8)", {"errors": errs}, budget=1.0)


def alpha_one_points() -> list:
    """Twenty points with Re s >= 1 avoiding the branch points 1 +- i."""
    sig = [1.0, 1.0, 1.0, 1.0, 1.05, 1.2, 1.5, 2.0, 3.0, 1.0,
           1.3, 1.7, 2.5, 1.0, 1.1, 4.0, 1.0, 1.6, 1.0, 1.25]
    ts = [0.0, 0.5, 2.0, -3.0, 1.0, -1.0, 7.5, 0.3, -12.0, 30.0,
          4.0, -0.7, 1.5, -60.0, 100.0, 2.2, 0.99, -25.0, -1.5, 9.0]
    return [complex(a, b) for a, b in zip(sig, ts)]


def k_alpha_one(s: complex) -> complex:
    """-gamma - (log(z - i) + log(z + i))/2, continuous on Re z >= 0."""
    z = s - 1
    return -EULER_GAMMA - 0.5 * (cmath.log(z - 1j) + cmath.log(z + 1j))


@_timed
def criterion_2(ctx: Context) -> CriterionResult:
    sysC = ctx.system(1.0)
    errs = [abs(K_eval(sysC, s).value - k_alpha_one(s)) for s in alpha_one_points()]
    worst = max(errs)
    return CriterionResult(2, "alpha = 1 closed form", worst <= 1e-8,
                           f"max error {worst:.2e} over 20 points (tol 1e-8)",
                           {"max_error": worst}, budget=10.0)


@_timed
def criterion_3(ctx: Context) -> CriterionResult:
    """K'(1+it) against its leading stationary-phase term, alpha = 1.25."""
    alpha = 1.25
    sysC = ctx.system(alpha)
    T = KAsymptoticTerms.build(alpha)
    ts = [100.0, 300.0, 1000.0]
    rel, env = [], []
    for t in ts:
        Phi, S, N, err = K_derivative_parts(sysC, t, 1)
        A = T.A_m(1) * t ** T.exponent(1)
        # K' = e^{-i Phi} S + N and the leading term is A e^{-i(Phi - pi/4)};
        # the common phase is removed before comparing
        rel.append(abs(S - A * cmath.exp(0.25j * math.pi) + cmath.exp(1j * Phi) * N) / abs(A))
        env.append(abs(S))
    tf = np.geomspace(100, 1000, 7)
    envf = [abs(K_derivative_parts(sysC, t, 1)[1]) for t in tf]
    slope = float(np.polyfit(np.log(tf), np.log(envf), 1)[0])
    target = (1 - alpha / 2) / (alpha - 1)
    # the contour derivative is itself tied to finite differences of K where those are feasible
    s0 = 1 + 3j
    fd = abs(K_derivative(sysC, s0, 1).value - K_derivative(sysC, s0, 1, method="fd", h=1e-4).value)
    ok = (rel[-1] <= 0.10 and rel[0] > rel[1] > rel[2] and abs(slope - target) <= 0.05
          and fd < 1e-6)
    detail = (f"rel err {', '.join(f'{r:.1e}' for r in rel)} at t = 1e2, 3e2, 1e3; "
              f"envelope slope {slope:.4f} vs {target:.4f}; contour-vs-FD at t=3 {fd:.1e}")
    return CriterionResult(3, "K' asymptotics", ok, detail,
                           {"rel": rel, "slope": slope, "fd_check": fd}, budget=120.0)


@_timed
def criterion_4(ctx: Context) -> CriterionResult:
    alpha = 1.2
    n = 2 * 10**4 if ctx.quick else 10**5
    sysC = ctx.system(alpha)
    P = generate(sysC, n)
    rep = sandwich_check(P, sysC)
    top = P.primes[-1]
    x = np.geomspace(top / 100, top, 400)
    r = np.abs(count_pi(P, x) - li_array(x)) * np.log(x) ** alpha / x
    ratio = float(r.max() / np.median(r))
    ok = rep.lower >= -1e-6 and rep.upper <= 1 + 1e-6 and ratio <= 2
    detail = (f"Pi_C - pi in [{rep.lower:.2e}, {rep.upper:.9f}]; "
              f"top-two-decade max/median {ratio:.2f} (<= 2)")
    return CriterionResult(4, "sandwich and PNT remainder", ok, detail,
                           {"lower": rep.lower, "upper": rep.upper, "ratio": ratio}, budget=300.0)


@_timed
def criterion_5(ctx: Context) -> CriterionResult:
    n = 2 * 10**4 if ctx.quick else 10**5
    parts, ok, m = [], True, {}
    for alpha in (1.0, 1.2):
        P = generate(ctx.system(alpha), n)
        rep = gap_check(P)
        beyond = int(np.sum(rep.violations >= rep.threshold))
        ok &= beyond == 0 and rep.threshold < n // 10
        parts.append(f"alpha={alpha}: threshold r={rep.threshold}, {rep.count} violation(s) below it")
        m[alpha] = {"threshold": rep.threshold, "violations": rep.violations.tolist()}
    return CriterionResult(5, "gap bound", ok, "; ".join(parts), m)


@_timed
def criterion_6(ctx: Context) -> CriterionResult:
    rng = np.random.default_rng(20240611)
    n_sys = 10 if ctx.quick else 50
    cap = 2 * 10**5
    bad, shrunk = 0, 0
    for _ in range(n_sys):
        k = int(rng.integers(1, 9))
        ps = 1 + 19 * (1 - rng.random(k))       # uniform on (1, 20]
        P = GeneralizedPrimeSystem.from_values(ps)
        x = float(10 ** rng.uniform(1, 4))
        while True:
            try:
                A = enumerate_integers(P, x, cap=cap)
                break
            except EnumerationCapError:
                x /= 2
                shrunk += 1
        ref = brute_force_dfs(P, x)
        got = A.expanded()
        if got.shape != ref.shape or not np.allclose(got, ref, rtol=1e-13, atol=0):
            bad += 1
    return CriterionResult(6, "enumeration vs brute force", bad == 0,
                           f"{n_sys - bad}/{n_sys} systems match ({shrunk} x-halvings to stay under "
                           f"{cap} atoms)", {"mismatches": bad}, budget=60.0)


@_timed
def criterion_7(ctx: Context) -> CriterionResult:
    worst = {}
    for alpha in (1.0, 1.2, 1.5):
        b = lambda u, a=alpha: log_density(u, a)
        sol = exp_star(b, 3.0, h=1e-3, extrapolate=True)
        u, N = exp_series(b, 3.0, 5e-4, terms=12)
        worst[alpha] = float(np.max(np.abs(sol.N(np.exp(u[::2])) - N[::2])))
    w = max(worst.values())
    return CriterionResult(7, "exp_* vs series", w <= 1e-6, f"sup |N diff| {w:.1e} (tol 1e-6)",
                           {"sup": worst})


@_timed
def criterion_8(ctx: Context) -> CriterionResult:
    alpha = 1.2
    P = ctx.primes_upto(alpha)
    a, a_err = a_alpha(P, ctx.system(alpha), ctx.X)
    A = ctx.atoms(alpha)
    m, spread = tail_mean_estimate(A, ctx.X)
    tm_err = spread
    diff = abs(a - m)
    bound = 3 * (a_err + tm_err)
    return CriterionResult(8, "residue vs density", diff <= bound,
                           f"a_alpha {a:.6f} +- {a_err:.1e}, tail mean {m:.6f} +- {tm_err:.1e}; "
                           f"|diff| {diff:.2e} vs 3x combined {bound:.2e}",
                           {"a": a, "a_err": a_err, "tail": m, "tail_err": tm_err})


@_timed
def criterion_9(ctx: Context) -> CriterionResult:
    X = ctx.X
    h = 1e-3
    sol = exp_star(lambda u: log_density(u, 1.0), math.floor(math.log(X) / h) * h, h=h,
                   extrapolate=True)
    x = log_grid(1e4 if not ctx.quick else 1e3, math.exp(sol.max_u), 40)
    fc = oscillation_fit(x, sol.N(x), 1.0)
    target = 1 / math.sqrt(math.pi)
    okc = abs(fc.amplitude / target - 1) <= 0.15 and phase_distance(fc.phase, math.pi / 2) <= 0.2
    P1 = ctx.primes_upto(1.0)
    k = diamond_constants(P1, X, ctx.system(1.0))
    A = ctx.atoms(1.0)
    xg = log_grid(1e4 if not ctx.quick else 1e3, X, 40)
    fp = oscillation_fit(xg, A.N(xg), k.c)
    okp = abs(fp.amplitude / k.d0 - 1) <= 0.15 and phase_distance(fp.phase, k.theta0) <= 0.2
    detail = (f"C1 amp {fc.amplitude:.4f} vs {target:.4f}, phase off {phase_distance(fc.phase, math.pi / 2):.3f}; "
              f"P1 amp {fp.amplitude:.4f} vs d0 {k.d0:.4f}, phase {fp.phase:.3f} vs theta0 {k.theta0:.3f}")
    return CriterionResult(9, "Diamond oscillation", okc and okp, detail,
                           {"c": k.c, "d0": k.d0, "theta0": k.theta0,
                            "c1_fit": (fc.amplitude, fc.phase), "p1_fit": (fp.amplitude, fp.phase)})


@_timed
def criterion_10(ctx: Context) -> CriterionResult:
    X = ctx.X
    grid = log_grid(10.0, X, 10)
    seqs, incs = {}, {}
    mono = True
    for alpha in (1.2, 1.8):
        a, _ = a_alpha(ctx.primes_upto(alpha), ctx.system(alpha), X)
        kp = kahane_partial(ctx.atoms(alpha), a, grid)
        mono &= bool(np.all(np.diff(kp) >= -1e-9 * kp[-1]))
        seqs[alpha] = kp
        incs[alpha] = float(kp[-1] - kp[np.searchsorted(grid, X / 10 * (1 - 1e-12))])
        if alpha == 1.8:
            ctx.drop(1.8)
    ratio = incs[1.2] / incs[1.8]
    ok = mono and ratio >= 2
    return CriterionResult(10, "Kahane trend", ok,
                           f"last-decade increments {incs[1.2]:.3g} (1.2) vs {incs[1.8]:.3g} (1.8), "
                           f"ratio {ratio:.1f} (>= 2); nondecreasing: {mono}",
                           {"increments": incs, "grid": grid.tolist(),
                            "partial": {k: v.tolist() for k, v in seqs.items()}})


@_timed
def criterion_11(ctx: Context) -> CriterionResult:
    X = ctx.X
    x = log_grid(X / 100, X, 60)
    top, prev = x >= X / 10, x < X / 10
    a, _ = a_alpha(ctx.primes_upto(1.2), ctx.system(1.2), X)
    r12 = riesz_mean(ctx.atoms(1.2), RieszSpec(2, a), x) * np.log(x) ** 2 / x
    ok12 = np.abs(r12[top]).max() <= 2 * np.abs(r12[prev]).max()
    ctx.drop(1.2)
    k = diamond_constants(ctx.primes_upto(1.0), X, ctx.system(1.0))
    r1 = riesz_mean(ctx.atoms(1.0), RieszSpec(2, k.c), x) * np.log(x) ** 1.5 / x
    both = r1[top].max() > 0 > r1[top].min()
    keep = np.abs(r1[top]).max() >= 0.5 * np.abs(r1[prev]).max()
    ok = bool(ok12 and both and keep)
    detail = (f"alpha=1.2 sup top/prev decade {np.abs(r12[top]).max():.3g}/{np.abs(r12[prev]).max():.3g}; "
              f"P1 top-decade range [{r1[top].min():.3g}, {r1[top].max():.3g}], "
              f"prev sup {np.abs(r1[prev]).max():.3g}")
    return CriterionResult(11, "Riesz-mean contrast", ok, detail,
                           {"alpha12_top": float(np.abs(r12[top]).max()),
                            "p1_top": (float(r1[top].min()), float(r1[top].max()))})


@_timed
def criterion_12(ctx: Context) -> CriterionResult:
    X = 10**5 if ctx.quick else 10**6
    table = sieve(10**7)
    B = build_blocks(BlockConfig(x1=10**5, k_max=3), table)
    B2 = build_blocks(BlockConfig(x1=110_000, k_max=2), table)
    xs = np.unique(np.concatenate([np.geomspace(2, X, 2000).astype(np.int64),
                                   np.arange(X - 1000, X + 1)]))
    ident, conv = 0, 0
    for blocks in (B, B2):
        f = f_values(blocks, table, X)
        ident += int(np.count_nonzero(gh_identity_check(blocks, table, f, xs)))
        conv += g_convolution_check(blocks, table, f)
    bal = all(balance_ok(B)) and all(balance_ok(B2))
    f = f_values(B, table, 10**6)
    tr = pstar_trends(B, table, f, log_grid(1e4, 9.99e5, 200))
    c, where = tr.excursion()
    near = any(b.x_minus / 2 <= where <= 2 * b.x_plus for b in B.blocks)
    ok = ident == 0 and conv == 0 and bal and near and c >= 1 / 8
    resid = [f"{b.balance * b.x:+.3f}/x_{b.index}" for b in B.blocks + B2.blocks]
    detail = (f"x1=1e5 built {len(B)} block(s) ({B.stop_reason}); x1=1.1e5 built {len(B2)}; "
              f"identity mismatches {ident}, f != g*1 at {conv} n <= {X}; balance {', '.join(resid)}; "
              f"excursion c = {c:.3f} at x = {where:.0f}")
    return CriterionResult(12, "P* identities and excursion", ok, detail,
                           {"c": c, "where": where, "k_built": len(B), "k_built_sep": len(B2),
                            "stop_reason": B.stop_reason}, budget=600.0)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


def run_all(quick: bool = False, only=None, echo=None) -> list:
    ctx = Context(quick)
    out = []
    for k, fn in enumerate(CRITERIA, start=1):
        if only and k not in only:
            continue
        res = fn(ctx)
        if echo:
            echo(res.line())
        out.append(res)
    return out
