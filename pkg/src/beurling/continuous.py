"""Continuous Riemann prime counting functions Pi_C(x) = int_1^x (1 - cos log^a u)/log u du.

Everything is computed on the log scale u = log x, where the measure has density
``(1 - cos u**alpha) * exp(u) / u``.  Values are accumulated panel by panel in an
append-only checkpoint table so that long increasing query sequences cost one
forward pass.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .classical import li, li_array

PANEL = 0.01
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def log_density(u, alpha: float):
    """Density of dPi_C(e^u) with respect to du (zero at u = 0)."""
    u = np.asarray(u, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = 2.0 * np.sin(0.5 * u ** alpha) ** 2 / u * np.exp(u)
    return np.where(u > 0, out, 0.0)


def scaled_density(u, alpha: float):
    """``log_density(u) * exp(-u)``, bounded and smooth away from 0."""
    u = np.asarray(u, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = 2.0 * np.sin(0.5 * u ** alpha) ** 2 / u
    return np.where(u > 0, out, 0.0)


@dataclass
class ContinuousSystem:
    """The continuous system Pi_{C,alpha} with a lazily grown checkpoint table."""

    alpha: float
    quad_tol: float = 1e-10
    panel: float = PANEL
    _cum: np.ndarray = field(default=None, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.quad_tol > 0:
            raise ValueError("quad_tol must be positive")
        first, _ = integrate.quad(log_density, 0.0, self.panel, args=(self.alpha,),
                                  epsabs=1e-16, epsrel=1e-14, limit=200)
        self._cum = np.array([0.0, first])

    def density(self, u):
        return log_density(u, self.alpha)

    # -- checkpoint table -------------------------------------------------
    @property
    def table_umax(self) -> float:
        return (len(self._cum) - 1) * self.panel

    def _extend(self, u_max: float) -> None:
        with self._lock:
            n_have = len(self._cum) - 1
            n_need = int(math.ceil(u_max / self.panel)) + 1
            if n_need <= n_have:
                return
            k = np.arange(n_have, n_need)
            lo = k * self.panel
            v = lo[:, None] + 0.5 * self.panel * (_GL_X[None, :] + 1.0)
            pieces = 0.5 * self.panel * (log_density(v, self.alpha) @ _GL_W)
            self._cum = np.concatenate([self._cum, self._cum[-1] + np.cumsum(pieces)])

    def _partial(self, k, u):
        """Integral of the density from panel start k*panel up to u (vectorized)."""
        lo = k * self.panel
        half = 0.5 * (u - lo)
        v = lo[..., None] + half[..., None] * (_GL_X + 1.0)
        return half * (log_density(v, self.alpha) @ _GL_W)

    def pi_c_u(self, u):
        """Pi_C(e^u) for u >= 0 (array friendly)."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 0):
            raise ValueError("Pi_C is defined for x >= 1")
        if u.size and u.max() > self.table_umax:
            self._extend(float(u.max()))
        k = np.minimum((u / self.panel).astype(np.int64), len(self._cum) - 2)
        return self._cum[k] + self._partial(k, u)

    def pi_c(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 1):
            raise ValueError("Pi_C is defined for x >= 1")
        out = self.pi_c_u(np.log(x))
        return float(out) if out.ndim == 0 else out

    # -- inversion --------------------------------------------------------
    def _bracket(self, r):
        r = np.asarray(r, dtype=float)
        while self._cum[-1] <= r.max():
            self._extend(self.table_umax * 1.25 + 1.0)
        k = np.searchsorted(self._cum, r, side="right") - 1
        return k

    def pi_c_inverse(self, r: float) -> float:
        """Least x >= 1 with Pi_C(x) = r, by bracketed Brent iteration."""
        if r < 0:
            raise ValueError("Pi_C takes only nonnegative values")
        if r == 0:
            return 1.0
        k = int(self._bracket(r))
        lo, hi = k * self.panel, (k + 1) * self.panel
        base = self._cum[k]
        kk = np.int64(k)

        def f(u):
            return base + float(self._partial(kk, np.float64(u))) - r

        u = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        return math.exp(u)

    def inverse_many(self, r, iters: int = 60) -> np.ndarray:
        """Vectorized inverse for an array of targets.

        Each target is bracketed in its checkpoint panel; iterates are Newton
        steps accepted only inside the current bracket, otherwise bisection.
        """
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("Pi_C takes only nonnegative values")
        k = self._bracket(r)
        lo = k * self.panel
        hi = lo + self.panel
        base = self._cum[k]
        frac = (r - base) / (self._cum[k + 1] - base)
        u = lo + self.panel * np.clip(frac, 0.0, 1.0)
        idx = np.arange(len(r))
        for _ in range(iters):
            if idx.size == 0:
                break
            ui, lo_i, hi_i = u[idx], lo[idx], hi[idx]
            f = base[idx] + self._partial(k[idx], ui) - r[idx]
            neg = f < 0
            lo_i = np.where(neg, ui, lo_i)
            hi_i = np.where(neg, hi_i, ui)
            d = log_density(ui, self.alpha)
            with np.errstate(divide="ignore", invalid="ignore"):
                newton = ui - f / d
            ok = np.isfinite(newton) & (newton >= lo_i) & (newton <= hi_i)
            u_new = np.where(ok, newton, 0.5 * (lo_i + hi_i))
            hit = np.abs(f) <= 4e-15 * np.maximum(r[idx], 1.0)
            u_new = np.where(hit, ui, u_new)
            done = (hit | (np.abs(u_new - ui) <= 1e-14 * np.maximum(ui, 1.0))
                    | (hi_i - lo_i <= 1e-14 * hi_i))
            u[idx], lo[idx], hi[idx] = u_new, lo_i, hi_i
            idx = idx[~done]
        x = np.exp(u)
        return np.where(r == 0, 1.0, x)

    def li_remainder(self, x: float) -> float:
        """Pi_C(x) - Li(x)."""
        if x < 2:
            raise ValueError("li_remainder needs x >= 2")
        return self.pi_c(x) - li(x)

    def li_remainder_array(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.pi_c(x) - li_array(x)


def scaled_li_remainder(sys: ContinuousSystem, x) -> np.ndarray:
    """|Pi_C(x) - Li(x)| * log(x)**alpha / x."""
    x = np.asarray(x, dtype=float)
    return np.abs(sys.li_remainder_array(x)) * np.log(x) ** sys.alpha / x
