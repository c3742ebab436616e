"""
Quadrature and series summation.

All integrators use the tanh-sinh (double exponential) rule with level
doubling.  The rule clusters nodes doubly-exponentially at both endpoints, so
integrable power singularities at the left endpoint and integrands that are
flat to infinite order at the right endpoint (``exp(-1/(1-r^2))``) are
resolved without special casing.  Integrands must accept numpy arrays.

The error estimate at level k is ``|I_k - I_{k-1}|``.  Since tanh-sinh roughly
doubles the number of correct digits per level this overestimates the error
of ``I_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DivergentIntegral, InvalidInput, NonConvergence

TOL_FLOOR = 1e-13
MAX_LEVEL = 12
MIN_LEVEL = 3
_T_MAX = 6.5        # endpoint distance underflows near t = 6.1
_T_MAX_SMOOTH = 4.0
_RHO_NEGLIGIBLE = 1e-100


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class LogQuadratureResult:
    """Integral stored as ``sign * exp(log_abs)``."""

    log_abs: float
    sign: float
    rel_error_estimate: float
    evaluations: int

    @property
    def value(self) -> float:
        return self.sign * math.exp(self.log_abs) if self.sign else 0.0


@dataclass(frozen=True)
class TruncationPolicy:
    max_terms: int = 2000
    tail_tol: float = 1e-16
    consecutive_small: int = 3

    def __post_init__(self):
        if self.max_terms < 1:
            raise InvalidInput("max_terms must be >= 1")
        if self.consecutive_small < 1:
            raise InvalidInput("consecutive_small must be >= 1")
        if not self.tail_tol > 0:
            raise InvalidInput("tail_tol must be > 0")


@dataclass(frozen=True)
class Disc:
    """The disc D(x0, R) with real centre, as used in the A_p^+ condition."""

    x0: float
    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise InvalidInput(f"disc radius must be positive, got {self.R}")

    @property
    def half_area(self) -> float:
        """Lebesgue measure of D(x0, R) intersected with the upper half-plane."""
        return 0.5 * math.pi * self.R**2


# --------------------------------------------------------------------------
# tanh-sinh rule
# --------------------------------------------------------------------------

def _ts_level(level: int, t_max: float, new_only: bool):
    """Half-line abscissae for one level: endpoint distance d (in units of the
    half-width) and the weight without the step factor h."""
    h = 2.0**-level
    if level == 0 or not new_only:
        t = np.arange(0.0, t_max + 0.5 * h, h)
    else:
        t = np.arange(h, t_max + 0.5 * h, 2 * h)
    with np.errstate(over="ignore"):
        u = 0.5 * math.pi * np.sinh(t)
        cu = np.cosh(u)
        d = 1.0 / (np.exp(u) * cu)
        w = 0.5 * math.pi * np.cosh(t) / cu**2
    keep = (d > 0) & (w > 0)
    return t[keep], d[keep], w[keep]


def _ts_points(a: float, b: float, level: int, t_max: float, new_only: bool):
    t, d, w = _ts_level(level, t_max, new_only)
    half = 0.5 * (b - a)
    left = a + half * d
    right = b - half * d
    zero = t == 0.0
    x = np.concatenate([left, right[~zero]])
    wt = np.concatenate([w, w[~zero]])
    inside = (x > a) & (x < b)
    return x[inside], wt[inside] * half


def tanh_sinh(f: Callable, a: float, b: float, tol: float = 1e-12, rtol: float = 0.0,
              max_level: int = MAX_LEVEL, t_max: float = _T_MAX) -> QuadratureResult:
    """Integrate ``f`` over ``[a, b]``; stop when the level difference is below
    ``max(tol, rtol * |I|)``."""
    if b == a:
        return QuadratureResult(0.0, 0.0, 1)
    if b < a:
        r = tanh_sinh(f, b, a, tol, rtol, max_level, t_max)
        return QuadratureResult(-r.value, r.abs_error_estimate, r.evaluations)
    total = 0.0
    prev = None
    err = math.inf
    n_eval = 0
    for level in range(max_level + 1):
        x, w = _ts_points(a, b, level, t_max, new_only=True)
        if x.size:
            fx = np.asarray(f(x), dtype=float)
            total += float(np.dot(w, fx))
            n_eval += x.size
        estimate = total * 2.0**-level
        if not math.isfinite(estimate):
            raise NonConvergence(f"non-finite integrand value on [{a}, {b}]")
        if prev is not None and level >= MIN_LEVEL:
            err = abs(estimate - prev)
            if err <= max(tol, rtol * abs(estimate)):
                return QuadratureResult(estimate, err, max(n_eval, 1))
        prev = estimate
    raise NonConvergence(
        f"tanh-sinh did not reach tol={tol:g} (rtol={rtol:g}) on [{a}, {b}] "
        f"within {max_level} levels; last change {err:.3g}")


def integrate_unit_interval(f: Callable, tol: float = 1e-12) -> QuadratureResult:
    """
    Integrate ``f`` over [0, 1] to absolute tolerance ``tol``.

    Tolerances below ``TOL_FLOOR`` are raised to it.  ``f`` may have an
    integrable power singularity at 0 or vanish to infinite order at 1.
    """
    if not tol > 0:
        raise InvalidInput("tol must be positive")
    return tanh_sinh(f, 0.0, 1.0, tol=max(tol, TOL_FLOOR))


# --------------------------------------------------------------------------
# log-domain integration of sharply peaked integrands
# --------------------------------------------------------------------------

def _argmax_log(log_f: Callable, a: float, b: float):
    span = b - a
    fr = np.concatenate([np.linspace(0.0, 1.0, 257)[1:-1],
                         np.logspace(-15, -1, 57),
                         1.0 - np.logspace(-15, -1, 57)])
    fr = np.unique(fr[(fr > 0) & (fr < 1)])
    xs = a + span * fr
    with np.errstate(all="ignore"):
        ys = np.asarray(log_f(xs), dtype=float)
    ys = np.where(np.isnan(ys), -np.inf, ys)
    i = int(np.argmax(ys))
    if not np.isfinite(ys[i]):
        return None, -np.inf
    if i == 0 and fr[0] < 1e-14:
        return a, ys[i]
    if i == len(xs) - 1 and fr[-1] > 1 - 1e-14:
        return b, ys[i]
    lo = xs[i - 1] if i > 0 else a
    hi = xs[i + 1] if i + 1 < len(xs) else b

    def neg(x):
        with np.errstate(all="ignore"):
            v = float(np.asarray(log_f(np.array([x])))[0])
        return np.inf if not math.isfinite(v) else -v

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * max(span, 1e-300)})
    if -res.fun >= ys[i]:
        return float(res.x), float(-res.fun)
    return float(xs[i]), float(ys[i])


def log_integrate(log_abs_f: Callable, a: float, b: float, rtol: float = 1e-13,
                  sign: Callable | None = None) -> LogQuadratureResult:
    """
    Integrate ``sign(x) * exp(log_abs_f(x))`` over ``[a, b]`` without underflow.

    The integrand is rescaled by its maximum and the interval is split at the
    peak, so each piece is monotone near its endpoints where tanh-sinh nodes
    cluster.
    """
    if b <= a:
        return LogQuadratureResult(-math.inf, 0.0, 0.0, 0)
    peak, top = _argmax_log(log_abs_f, a, b)
    if peak is None:
        return LogQuadratureResult(-math.inf, 0.0, 0.0, 1)

    def g(x):
        with np.errstate(all="ignore"):
            v = np.exp(np.asarray(log_abs_f(x), dtype=float) - top)
        v = np.where(np.isnan(v), 0.0, v)
        return v * sign(x) if sign is not None else v

    rtol = max(rtol, 1e-15)
    pieces = [(lo, hi) for lo, hi in ((a, peak), (peak, b)) if hi > lo]
    results = {}
    for piece in pieces:
        try:
            results[piece] = tanh_sinh(g, *piece, tol=1e-300, rtol=rtol / 2)
        except NonConvergence:
            pass
    if not results:
        raise NonConvergence(f"log-domain quadrature failed on both sides of the peak {peak}")
    # a thin sliver next to the peak may not converge relative to itself; only
    # its share of the total matters
    floor = max(abs(r.value) for r in results.values())
    for piece in pieces:
        if piece not in results:
            results[piece] = tanh_sinh(g, *piece, tol=rtol / 4 * floor)
    total = sum(r.value for r in results.values())
    err = sum(r.abs_error_estimate for r in results.values())
    n_eval = sum(r.evaluations for r in results.values())
    if total == 0.0:
        return LogQuadratureResult(-math.inf, 0.0, 0.0, n_eval)
    return LogQuadratureResult(math.log(abs(total)) + top, math.copysign(1.0, total),
                               err / abs(total), n_eval)


# --------------------------------------------------------------------------
# half-disc regions D(x0, R) ∩ {Im z > 0}
# --------------------------------------------------------------------------

def _polar_product(F: Callable, th0: float, th1: float, rho_lo: Callable, rho_hi: Callable,
                   tol: float, rtol: float, log_radial: bool = False,
                   max_level: int = 8) -> QuadratureResult:
    """Product tanh-sinh for ∫_{th0}^{th1} ∫_{rho_lo(θ)}^{rho_hi(θ)} F(θ, ρ) ρ dρ dθ."""
    prev = None
    err = math.inf
    n_eval = 0
    for level in range(1, max_level + 1):
        th, wth = _ts_points(th0, th1, level, _T_MAX_SMOOTH, new_only=False)
        tau, wtau = _ts_points(0.0, 1.0, level, _T_MAX, new_only=False)
        th = th[:, None]
        lo = rho_lo(th)
        hi = rho_hi(th)
        if log_radial:
            slo = np.log(lo)
            shi = np.log(np.maximum(hi, lo))
            rho = np.exp(slo + (shi - slo) * tau[None, :])
            jac = (shi - slo) * rho * rho
        else:
            rho = lo + (hi - lo) * tau[None, :]
            jac = (hi - lo) * rho
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            vals = np.asarray(F(th, rho), dtype=float) * jac
        # |ζ|^a overflows only at radii whose ball carries ~ρ^(a+2) of the mass
        lost = ~np.isfinite(vals) & (rho < _RHO_NEGLIGIBLE)
        vals = np.where((jac == 0) | lost, 0.0, vals)
        est = float(wth @ vals @ wtau) * 4.0**-level
        n_eval += vals.size
        if not math.isfinite(est):
            raise NonConvergence("non-finite value in half-disc quadrature")
        if prev is not None and level >= MIN_LEVEL:
            err = abs(est - prev)
            if err <= max(tol, rtol * abs(est)):
                return QuadratureResult(est, err, n_eval)
        prev = est
    raise NonConvergence(
        f"half-disc quadrature did not reach tol={tol:g} (rtol={rtol:g}); last change {err:.3g}")


def _origin_geometry(disc: Disc):
    """θ-range and radial limit of the region seen from the origin (origin in closure)."""
    x0, R = disc.x0, disc.R
    on_circle = abs(abs(x0) - R) <= 1e-14 * R
    if on_circle:
        th0, th1 = (0.0, 0.5 * math.pi) if x0 > 0 else (0.5 * math.pi, math.pi)

        def rho_max(th):
            return np.maximum(2.0 * x0 * np.cos(th), 0.0)
    else:
        th0, th1 = 0.0, math.pi

        def rho_max(th):
            return x0 * np.cos(th) + np.sqrt(np.maximum(R * R - (x0 * np.sin(th)) ** 2, 0.0))
    core = 0.5 * R if on_circle else 0.5 * (R - abs(x0))
    return th0, th1, rho_max, core


def _shell_increments(f: Callable, disc: Disc, levels: int = 50) -> np.ndarray:
    """Integrals of f over the shells core*2^-(j+1) < |ζ| < core*2^-j of the region."""
    th0, th1, rho_max, core = _origin_geometry(disc)
    gth, wth = np.polynomial.legendre.leggauss(48)
    gs, ws = np.polynomial.legendre.leggauss(12)
    th = 0.5 * (th1 - th0) * (gth + 1) + th0
    wth = 0.5 * (th1 - th0) * wth
    rmax = rho_max(th)
    out = np.empty(levels)
    for j in range(levels):
        hi = np.minimum(core * 2.0**-j, rmax)
        lo = np.minimum(core * 2.0 ** -(j + 1), hi)
        slo = np.log(np.maximum(lo, 1e-300))[:, None]
        shi = np.log(np.maximum(hi, 1e-300))[:, None]
        s = 0.5 * (shi - slo) * (gs[None, :] + 1) + slo
        rho = np.exp(s)
        z = rho * np.exp(1j * th[:, None])
        vals = np.asarray(f(z), dtype=float) * rho * rho * 0.5 * (shi - slo)
        out[j] = float(wth @ vals @ ws)
    return out


def is_divergent_at_origin(f: Callable, disc: Disc, levels: int = 50) -> bool:
    """
    Decide whether ∫ f over the region diverges because of the origin.

    The region near 0 is cut into dyadic shells.  The integral is declared
    divergent when each of the three deepest shells adds more than 1% to the
    accumulated near-origin value.  For ``|ζ|^a`` this flags a <= -2 and also
    the indistinguishable band -2 < a < -1.96.
    """
    if abs(disc.x0) > disc.R:
        return False
    inc = _shell_increments(f, disc, levels)
    partial = np.cumsum(inc)
    growth = np.abs(inc[-3:]) > 0.01 * np.abs(partial[-3:])
    return bool(np.all(growth))


def integrate_half_disc(f: Callable, disc: Disc, tol: float = 1e-12,
                        rtol: float = 0.0, check_divergence: bool = True) -> QuadratureResult:
    """
    Integrate ``f(ζ)`` (complex array in, real array out) over D(x0, R) ∩ {Im ζ > 0}.

    When the origin lies in the closed region, polar coordinates about the
    origin are used so that a power singularity ``|ζ|^a`` with ``a > -2``
    becomes an endpoint singularity of the radial integral.  Otherwise polar
    coordinates about the centre are used.

    Raises DivergentIntegral when the origin shell test reports divergence.
    Callers that already know the integrand is integrable (e.g. from its
    exponent) can skip the test with ``check_divergence=False``.
    """
    if not (tol > 0 or rtol > 0):
        raise InvalidInput("tol or rtol must be positive")
    tol = max(tol, 0.0)
    if abs(disc.x0) <= disc.R:
        if check_divergence and is_divergent_at_origin(f, disc):
            raise DivergentIntegral(f"integrand is not integrable at the origin on {disc}")
        th0, th1, rho_max, _ = _origin_geometry(disc)

        def F(th, rho):
            return f(rho * np.exp(1j * th))

        return _polar_product(F, th0, th1, lambda th: np.zeros_like(th), rho_max, tol, rtol)

    x0, R = disc.x0, disc.R

    def G(th, rho):
        return f(x0 + rho * np.exp(1j * th))

    return _polar_product(G, 0.0, math.pi, lambda th: np.zeros_like(th),
                          lambda th: np.full_like(th, R), tol, rtol)


def integrate_half_disc_cutoff(f: Callable, disc: Disc, eps: float, tol: float = 1e-12,
                               rtol: float = 0.0) -> QuadratureResult:
    """Integral over the region with the ball |ζ| < eps removed (origin in closure)."""
    if abs(disc.x0) > disc.R:
        raise InvalidInput("cutoff integration needs the origin in the closed region")
    if not eps > 0:
        raise InvalidInput("eps must be positive")
    th0, th1, rho_max, _ = _origin_geometry(disc)

    def F(th, rho):
        return f(rho * np.exp(1j * th))

    return _polar_product(F, th0, th1, lambda th: np.full_like(th, eps),
                          lambda th: np.maximum(rho_max(th), eps), tol, rtol, log_radial=True)


# --------------------------------------------------------------------------
# series
# --------------------------------------------------------------------------

def sum_series(term: Callable[[int], complex], policy: TruncationPolicy,
               magnitude: Callable[[int, complex], float] | None = None):
    """
    Sum ``term(0) + term(1) + ...``.

    Stops after ``policy.consecutive_small`` successive terms whose magnitude
    is below ``policy.tail_tol``.  ``magnitude(m, term_m)`` overrides ``abs``
    when a term needs a more conservative size (e.g. a sup bound).

    Returns ``(value, terms_used)``.
    """
    total = 0j
    small = 0
    last = math.inf
    for m in range(policy.max_terms):
        t = term(m)
        total += t
        last = abs(t) if magnitude is None else magnitude(m, t)
        small = small + 1 if last < policy.tail_tol else 0
        if small >= policy.consecutive_small:
            return total, m + 1
    if last >= policy.tail_tol:
        raise NonConvergence(
            f"series not converged after {policy.max_terms} terms (last term {last:.3g})")
    return total, policy.max_terms
