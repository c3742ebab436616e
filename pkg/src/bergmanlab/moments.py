"""
Moment function Φ(x) = ∫₀¹ r^(2x+1) λ(r) dr and its integrated-by-parts ladder.

Everything is computed in the gap variable u = 1 - r², where

    Φ(x) = ½ ∫₀¹ (1-u)^x Λ(u) du,        Λ(u) = λ(sqrt(1-u)),

and in log domain, since Φ for flat weights falls below the double range long
before the ratios built from it become interesting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import special

from . import numerics
from .errors import InvalidInput
from .weights import RadialWeight, derivative_ratio, psi, sign_onset

DEFAULT_RTOL = 1e-13
_LOG_HALF = math.log(0.5)


@dataclass(frozen=True)
class MomentEntry:
    x: float
    value: float
    log_value: float
    abs_error: float


@dataclass(frozen=True)
class MomentTable:
    """Φ sampled on a grid. ``log_value`` is authoritative; ``value`` may underflow."""

    weight_id: str
    entries: tuple[MomentEntry, ...]

    @property
    def xs(self) -> np.ndarray:
        return np.array([e.x for e in self.entries])

    @property
    def log_values(self) -> np.ndarray:
        return np.array([e.log_value for e in self.entries])


def _x_check(x: float) -> float:
    x = float(x)
    if not (x >= 0 and math.isfinite(x)):
        raise InvalidInput(f"moment argument must be finite and >= 0, got {x}")
    return x


@lru_cache(maxsize=16384)
def _log_phi_cached(w: RadialWeight, x: float, rtol: float) -> tuple[float, float]:
    def log_f(u):
        u = np.asarray(u, dtype=float)
        return x * np.log1p(-u) + w.log_value_gap(u)

    res = numerics.log_integrate(log_f, 0.0, 1.0, rtol=rtol)
    return float(res.log_abs + _LOG_HALF), float(res.rel_error_estimate)


def log_phi(w: RadialWeight, x: float, rtol: float = DEFAULT_RTOL) -> tuple[float, float]:
    """Return ``(log Φ(x), relative error estimate)``."""
    return _log_phi_cached(w, _x_check(x), max(float(rtol), numerics.TOL_FLOOR))


def phi(w: RadialWeight, x: float, tol: float = DEFAULT_RTOL) -> float:
    """Φ(x) to relative accuracy ``tol`` (returns 0.0 only on underflow)."""
    lv, _ = log_phi(w, x, tol)
    return math.exp(lv)


def phi_beta_oracle(t: float, x: float) -> float:
    """Closed form ½ B(x+1, t+1) of Φ for the weight (1-r²)^t."""
    return 0.5 * float(special.beta(x + 1.0, t + 1.0))


def moment_table(w: RadialWeight, xs: Sequence[float], rtol: float = DEFAULT_RTOL) -> MomentTable:
    entries = []
    for x in xs:
        lv, rel = log_phi(w, x, rtol)
        v = math.exp(lv)
        entries.append(MomentEntry(float(x), v, lv, rel * v))
    return MomentTable(w.name, tuple(entries))


# --------------------------------------------------------------------------
# ladder Φ_n, Φ̃_n, Θ_n, θ_n
# --------------------------------------------------------------------------

def _psi_gap(w: RadialWeight, n: int):
    """log|ψ_n| and sign(ψ_n) as functions of u."""
    if w.gap_log_derivs is not None:
        def ratio(u):
            u = np.asarray(u, dtype=float)
            r = np.sqrt(np.maximum(1.0 - u, 0.0))
            with np.errstate(over="ignore", invalid="ignore"):
                return (-1) ** n * derivative_ratio(w, n, r, u)

        def log_abs(u):
            q = ratio(u)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.log(np.abs(q)) + w.log_value_gap(u)
            # the ratio overflows only where the weight itself underflows
            return np.where(np.isfinite(q), out, -np.inf)

        def sign(u):
            return np.nan_to_num(np.sign(ratio(u)), nan=0.0)
        return log_abs, sign

    def values(u):
        u = np.asarray(u, dtype=float)
        return psi(w, n, np.sqrt(np.maximum(1.0 - u, 0.0)))

    def log_abs(u):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(values(u)))

    def sign(u):
        return np.sign(values(u))
    return log_abs, sign


@dataclass(eq=False)
class MomentLadder:
    """Φ_n, Φ̃_n and θ_n for one weight and one order n.

    Φ_n(x) = ∫₀¹ r^(2x+1+n) ψ_n(r) dr and Φ̃_n is the same integral over
    (a_n, 1), where ψ_n = (-1)^n λ^(n) is non-negative.
    """

    weight: RadialWeight
    n: int
    a_n: float
    rtol: float = 1e-12
    _cache: dict = field(default_factory=dict, repr=False)
    _psi: tuple = field(init=False, repr=False)

    def __post_init__(self):
        self._psi = _psi_gap(self.weight, self.n)

    def _log_piece(self, x: float, u_lo: float, u_hi: float) -> tuple[float, float]:
        """(log|I|, sign I) for ½∫ (1-u)^(x+n/2) ψ_n du over [u_lo, u_hi]."""
        key = (x, u_lo, u_hi)
        if key not in self._cache:
            log_abs, sign = self._psi
            e = x + 0.5 * self.n

            def log_f(u):
                u = np.asarray(u, dtype=float)
                return e * np.log1p(-u) + log_abs(u)

            res = numerics.log_integrate(log_f, u_lo, u_hi, rtol=self.rtol, sign=sign)
            self._cache[key] = (float(res.log_abs + _LOG_HALF), float(res.sign))
        return self._cache[key]

    @property
    def _u_onset(self) -> float:
        return 1.0 - self.a_n * self.a_n

    def log_phi_n(self, x: float) -> float:
        x = _x_check(x)
        if self.n == 0:
            return log_phi(self.weight, x)[0]
        lv, s = self._log_piece(x, 0.0, 1.0)
        if s <= 0:
            raise ArithmeticError(f"Φ_{self.n}({x}) is not positive")
        return lv

    def log_phi_n_tilde(self, x: float) -> float:
        x = _x_check(x)
        if self.n == 0 and self.a_n == 0.0:
            return log_phi(self.weight, x)[0]
        return self._log_piece(x, 0.0, self._u_onset)[0]

    def phi_n(self, x: float) -> float:
        return math.exp(self.log_phi_n(x))

    def phi_n_tilde(self, x: float) -> float:
        return math.exp(self.log_phi_n_tilde(x))

    def log_product(self, x: float) -> float:
        """log ∏_{j=2}^{n+1} (2x + j)."""
        return float(sum(math.log(2.0 * x + j) for j in range(2, self.n + 2)))

    def log_theta_cap(self, x: float) -> float:
        """log Θ_n(x)."""
        return self.log_phi_n_tilde(x) - self.log_product(x)

    def theta_n(self, x: float) -> float:
        """θ_n(x) = -log Θ_n(x)."""
        return -self.log_theta_cap(x)

    def head_ratio(self, x: float) -> float:
        """|∫₀^{a_n} r^(2x+1+n) ψ_n dr| / Φ̃_n(x)."""
        if self.a_n == 0.0:
            return 0.0
        lv, s = self._log_piece(_x_check(x), self._u_onset, 1.0)
        if s == 0:
            return 0.0
        return math.exp(lv - self.log_phi_n_tilde(x))


def build_ladder(w: RadialWeight, n: int) -> MomentLadder:
    """Ladder of order n with the cutoff a_n taken from the sign onset of ψ_n."""
    if n < 0 or n > w.derivative_order_supported:
        raise InvalidInput(f"ladder order {n} outside 0..{w.derivative_order_supported}")
    report = sign_onset(w, n)
    return MomentLadder(w, n, report.a_n)


def ladder_identity_defect(l: MomentLadder, x: float) -> float:
    """Relative defect of Φ(x)·∏_{j=2}^{n+1}(2x+j) = Φ_n(x)."""
    lhs = log_phi(l.weight, x)[0] + l.log_product(x)
    return abs(math.expm1(lhs - l.log_phi_n(x)))


def check_tail_ratio(l: MomentLadder, x: float) -> float:
    """|Φ_n(x)/Φ̃_n(x) - 1|, from the head piece over (0, a_n) directly."""
    return l.head_ratio(x)


def log_convexity_defect(w: RadialWeight, xs: Sequence[float]) -> float:
    """Largest violation of log-convexity of Φ over consecutive triples of ``xs``.

    For lo < mid < hi with mid = t·lo + (1-t)·hi the value is
    1 - Φ(lo)^(2t) Φ(hi)^(2(1-t)) / Φ(mid)², which reduces to
    (Φ(mid)² - Φ(lo)Φ(hi)) / Φ(mid)² on a uniform grid. Non-positive values
    certify midpoint log-convexity on the grid.
    """
    xs = [float(x) for x in xs]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise InvalidInput("grid must be strictly increasing")
    lv = [log_phi(w, x)[0] for x in xs]
    worst = -math.inf
    for i in range(1, len(xs) - 1):
        lo, mid, hi = xs[i - 1], xs[i], xs[i + 1]
        t = (hi - mid) / (hi - lo)
        gap = 2.0 * (t * lv[i - 1] + (1.0 - t) * lv[i + 1] - lv[i])
        worst = max(worst, -math.expm1(gap))
    return worst


def theta_second_derivative_estimate(l: MomentLadder, x: float, h: float = 0.5) -> float:
    """-x² θ_n''(x) by a central second difference of step ``h``."""
    x = _x_check(x)
    if x * (2.0 * math.sqrt(2.0) - 2.0) < 1.0 + l.n:
        raise InvalidInput(f"x={x} too small: need x/(2x+1+n) >= 1/(2*sqrt(2)) for n={l.n}")
    if x - h < 0:
        raise InvalidInput("step reaches below x = 0")
    t0, tm, tp = l.theta_n(x), l.theta_n(x - h), l.theta_n(x + h)
    return -x * x * (tp - 2.0 * t0 + tm) / (h * h)
