"""
Weight families on the disc and the upper half-plane.

Radial weights are stored both as a function of ``r`` and as a function of
the gap ``u = 1 - r**2``.  The gap form is what the moment integrals use: it
keeps ``(1 - r^2)^t`` exact near the boundary and turns the infinite-order
flatness of ``exp(-B/(1-r^2)^alpha)`` into flatness at ``u = 0`` where
floating point has full relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import numerics
from .errors import InvalidInput, NotFound

DELTA = 1e-3
DEFAULT_DERIVATIVE_ORDER = 6
ANALYTIC_DERIVATIVE_ORDER = 12


@dataclass(frozen=True, eq=False)
class RadialWeight:
    """A radial weight λ(|z|) on the unit disc.

    ``log_gap(u)`` returns log λ at ``r = sqrt(1 - u)``; ``gap_log_derivs(u, k)``
    returns the first ``k`` derivatives of that function in ``u`` (only for the
    analytic families).
    """

    family: str
    params: dict
    evaluator: Callable
    log_gap: Callable
    gap_log_derivs: Optional[Callable] = None
    derivative_order_supported: int = DEFAULT_DERIVATIVE_ORDER
    scale: float = 1.0
    label: str = ""

    def __call__(self, r):
        return self.scale * self.evaluator(np.asarray(r, dtype=float))

    def log_value_gap(self, u):
        return math.log(self.scale) + self.log_gap(np.asarray(u, dtype=float))

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if not self.params:
            return self.family
        args = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family}:{args}" + ("" if self.scale == 1.0 else f"*{self.scale:g}")

    def scaled(self, c: float) -> "RadialWeight":
        if not c > 0:
            raise InvalidInput("scale factor must be positive")
        return RadialWeight(self.family, self.params, self.evaluator, self.log_gap,
                            self.gap_log_derivs, self.derivative_order_supported,
                            self.scale * c, self.label)

    def power(self, k: float) -> "RadialWeight":
        """The weight λ^k (used for the Hartogs inflation kernels)."""
        p = self.params
        if self.family == "power":
            w = make_power(p["t"] * k)
        elif self.family == "dostanic":
            w = make_dostanic(p["A"] * k, p["B"] * k, p["alpha"])
        else:
            base = self
            return make_custom(lambda r: base(r) ** k, name=f"({self.name})^{k:g}")
        return w if self.scale == 1.0 else w.scaled(self.scale**k)


def _power_log_derivs(t):
    def derivs(u, k):
        u = np.asarray(u, dtype=float)
        return [t * (-1) ** (j - 1) * math.factorial(j - 1) * u ** (-j) for j in range(1, k + 1)]
    return derivs


def make_power(t: float) -> RadialWeight:
    """The standard weight (1 - r^2)^t, t > -1."""
    if not t > -1:
        raise InvalidInput(f"power weight needs t > -1, got {t}")
    t = float(t)

    def ev(r):
        if t == 0:
            return np.ones_like(r)
        with np.errstate(divide="ignore"):
            return np.power(np.maximum(1.0 - r * r, 0.0), t)

    def log_gap(u):
        with np.errstate(divide="ignore"):
            return t * np.log(u) if t != 0 else np.zeros_like(u)

    w = RadialWeight("power", {"t": t}, ev, log_gap, _power_log_derivs(t),
                     ANALYTIC_DERIVATIVE_ORDER)
    _check_radial(w)
    return w


def make_dostanic(A: float, B: float, alpha: float) -> RadialWeight:
    """(1 - r^2)^A exp(-B / (1 - r^2)^alpha) with A >= 0, B > 0, alpha > 0."""
    if not (A >= 0 and B > 0 and alpha > 0):
        raise InvalidInput(f"Dostanic weight needs A >= 0, B > 0, alpha > 0; got {A}, {B}, {alpha}")
    A, B, alpha = float(A), float(B), float(alpha)

    def log_gap(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            out = -B * np.power(u, -alpha)
            if A:
                out = out + A * np.log(u)
        return out

    def ev(r):
        u = np.maximum(1.0 - r * r, 0.0)
        with np.errstate(divide="ignore", over="ignore"):
            return np.exp(log_gap(u))

    def derivs(u, k):
        u = np.asarray(u, dtype=float)
        out = []
        falling = 1.0
        for j in range(1, k + 1):
            falling *= (-alpha - j + 1)
            d = -B * falling * u ** (-alpha - j)
            if A:
                d = d + A * (-1) ** (j - 1) * math.factorial(j - 1) * u ** (-j)
            out.append(d)
        return out

    w = RadialWeight("dostanic", {"A": A, "B": B, "alpha": alpha}, ev, log_gap, derivs,
                     ANALYTIC_DERIVATIVE_ORDER)
    _check_radial(w)
    return w


def make_custom(evaluator: Callable, name: str = "custom",
                derivative_order_supported: int = DEFAULT_DERIVATIVE_ORDER) -> RadialWeight:
    """Wrap an arbitrary continuous weight r -> λ(r) >= 0 (vectorised)."""

    def log_gap(u):
        r = np.sqrt(np.maximum(1.0 - np.asarray(u, dtype=float), 0.0))
        with np.errstate(divide="ignore"):
            return np.log(evaluator(r))

    w = RadialWeight("custom", {}, evaluator, log_gap, None, derivative_order_supported,
                     label=name)
    _check_radial(w)
    return w


def _check_radial(w: RadialWeight):
    r = np.linspace(0.0, 1.0, 1000)
    vals = w(r)
    if np.any(~(vals >= 0)):
        raise InvalidInput(f"weight {w.name} is negative or undefined on [0, 1]")
    # ∫ r λ(r) dr = ½ ∫ Λ(u) du
    res = numerics.log_integrate(w.log_value_gap, 0.0, 1.0, rtol=1e-8)
    if res.sign <= 0 or not math.isfinite(res.log_abs):
        raise InvalidInput(f"weight {w.name} has no finite positive mass")


# --------------------------------------------------------------------------
# derivatives
# --------------------------------------------------------------------------

def _bell(derivs):
    """Complete Bell polynomials Y_0..Y_k from L', L'', ..., L^(k): G^(k)/G for G = exp(L)."""
    k = len(derivs)
    Y = [np.ones_like(derivs[0]) if k else 1.0]
    for m in range(k):
        acc = 0.0
        for i in range(m + 1):
            acc = acc + math.comb(m, i) * Y[m - i] * derivs[i]
        Y.append(acc)
    return Y


def derivative_ratio(w: RadialWeight, n: int, r, u=None):
    """λ^(n)(r) / λ(r) for the analytic families, via λ(r) = G(1 - r^2)."""
    r = np.asarray(r, dtype=float)
    if u is None:
        u = 1.0 - r * r
    u = np.asarray(u, dtype=float)
    if n == 0:
        return np.ones(np.broadcast(r, u).shape)
    Y = _bell(w.gap_log_derivs(u, n))
    out = 0.0
    for j in range(n // 2 + 1):
        c = math.factorial(n) / (math.factorial(j) * math.factorial(n - 2 * j))
        out = out + c * (-2.0 * r) ** (n - 2 * j) * (-1) ** j * Y[n - j]
    return out


def _fornberg(x0: float, xs: np.ndarray, m: int) -> np.ndarray:
    """Finite difference weights for the m-th derivative at x0 on nodes xs."""
    n = len(xs)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def finite_difference(w: RadialWeight, n: int, r: float, accuracy: int = 10) -> float:
    """Central finite-difference estimate of λ^(n)(r).

    The weight is extended evenly to (-1, 1), so the stencil only has to stay
    below r = 1. The step shrinks geometrically from the largest one that
    fits; the estimate kept is the one at the largest step whose neighbours
    agree nearly as well as the best pair. This balances truncation error
    (~h^accuracy) against round-off (~eps / h^n).
    """
    if n == 0:
        return float(w(r))
    half = (n + 1) // 2 + accuracy // 2 - 1
    offsets = np.arange(-half, half + 1, dtype=float)
    h0 = 0.95 * (1.0 - r) / half
    est = np.empty(15)
    for k in range(est.size):
        nodes = r + h0 * 2.0 ** (-0.5 * k) * offsets
        est[k] = np.dot(_fornberg(r, nodes, n), w(np.abs(nodes)))
    jumps = np.abs(np.diff(est))
    score = jumps[:-1] + jumps[1:]
    # identical samples at tiny steps give a spurious zero disagreement
    score[score == 0.0] = np.inf
    if not np.isfinite(score).any():
        return float(est[1])
    i = int(np.argmax(score <= 4.0 * score.min()))
    return float(est[i + 1])


def numeric_derivative(w: RadialWeight, n: int, r: float) -> float:
    """λ^(n)(r) on the safe band [δ, 1 - δ]; analytic where the family allows."""
    if n < 0 or n > w.derivative_order_supported:
        raise InvalidInput(f"derivative order {n} exceeds {w.derivative_order_supported}")
    if not (DELTA <= r <= 1.0 - DELTA):
        raise InvalidInput(f"r={r} outside the safe band [{DELTA}, {1 - DELTA}]")
    if n == 0:
        return float(w(r))
    if w.gap_log_derivs is not None:
        return float(derivative_ratio(w, n, r) * w(r))
    return finite_difference(w, n, r)


def psi(w: RadialWeight, n: int, r):
    """ψ_n(r) = (-1)^n λ^(n)(r), vectorised."""
    r = np.asarray(r, dtype=float)
    if w.gap_log_derivs is not None:
        return (-1) ** n * derivative_ratio(w, n, r) * w(r)
    return (-1) ** n * np.array([finite_difference(w, n, float(x)) for x in np.ravel(r)]).reshape(r.shape)


@dataclass(frozen=True)
class SignOnsetReport:
    n: int
    a_n: float
    certified_grid: int


def sign_onset(w: RadialWeight, n: int, samples: int = 1000) -> SignOnsetReport:
    """
    Smallest grid point a_n such that ψ_n = (-1)^n λ^(n) is non-negative on
    every sample of [a_n, 1 - δ].

    a_n = 0 when the sign condition holds on the whole grid.  Samples with
    ψ_n >= -1e-12 * max|ψ_n| count as non-negative.
    """
    if n < 0 or n > w.derivative_order_supported:
        raise InvalidInput(f"derivative order {n} exceeds {w.derivative_order_supported}")
    grid = np.linspace(0.0, 1.0 - DELTA, samples)
    vals = psi(w, n, grid)
    scale = float(np.max(np.abs(vals)))
    bad = np.nonzero(vals < -1e-12 * scale)[0]
    if bad.size == 0:
        return SignOnsetReport(n, 0.0, samples)
    last = int(bad[-1])
    if last == samples - 1:
        raise NotFound(f"(-1)^{n} λ^({n}) is negative at r = 1 - δ for {w.name}")
    return SignOnsetReport(n, float(grid[last + 1]), samples)


# --------------------------------------------------------------------------
# Cayley transform between the upper half-plane and the disc
# --------------------------------------------------------------------------

def cayley(zeta, boundary: bool = False):
    """φ(ζ) = (i - ζ)/(i + ζ), upper half-plane -> unit disc."""
    zeta = np.asarray(zeta, dtype=complex)
    im = zeta.imag
    if np.any(im < 0) or (not boundary and np.any(im <= 0)):
        raise InvalidInput("cayley needs Im ζ > 0 (Im ζ >= 0 in boundary mode)")
    return (1j - zeta) / (1j + zeta)


def inverse_cayley(z):
    """ψ(z) = i(1 - z)/(1 + z), unit disc -> upper half-plane."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise InvalidInput("inverse_cayley needs |z| < 1")
    return 1j * (1 - z) / (1 + z)


def cayley_derivative(zeta):
    zeta = np.asarray(zeta, dtype=complex)
    return -2j / (1j + zeta) ** 2


def inverse_cayley_derivative(z):
    z = np.asarray(z, dtype=complex)
    return -2j / (1 + z) ** 2


# --------------------------------------------------------------------------
# |g|^2 weights on the disc and weights on the half-plane
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HoloWeight:
    """ω = |g|^2 for g holomorphic and zero-free on the disc.

    ``coeffs`` (ascending Taylor coefficients) is set when g is a polynomial;
    it enables exact Gram moments.
    """

    g: Callable
    name: str = "holo"
    coeffs: Optional[tuple] = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.check:
            r = np.linspace(0.0, 1.0 - 1e-3, 50)
            th = np.linspace(0.0, 2 * math.pi, 50, endpoint=False)
            z = r[:, None] * np.exp(1j * th[None, :])
            gz = np.asarray(self.g(z), dtype=complex)
            if np.any(~np.isfinite(gz)) or np.min(np.abs(gz)) == 0.0:
                raise InvalidInput(f"g for {self.name} vanishes or is undefined on the disc")

    def __call__(self, z):
        return np.abs(self.g(np.asarray(z, dtype=complex))) ** 2

    def power(self, k: int) -> "HoloWeight":
        """The weight |g^k|^2."""
        base = self.g
        coeffs = None
        if self.coeffs is not None:
            coeffs = tuple(np.polynomial.polynomial.polypow(np.array(self.coeffs, dtype=complex), k))
        return HoloWeight(lambda z: base(z) ** k, f"({self.name})^{k}", coeffs, check=False)


def polynomial_weight(coeffs, name: str | None = None) -> HoloWeight:
    """ω = |g|^2 for the polynomial g with ascending coefficients."""
    c = tuple(complex(x) for x in coeffs)
    return HoloWeight(lambda z: np.polynomial.polynomial.polyval(z, np.array(c)),
                      name or f"poly{list(c)}", c)


def _pow_positive_cut(w, e: float):
    """w**e with the branch cut on the positive real axis (arg in [0, 2π))."""
    w = np.asarray(w, dtype=complex)
    arg = np.mod(np.angle(w), 2 * math.pi)
    return np.exp(e * (np.log(np.abs(w)) + 1j * arg))


def remark_F(p0: float = 5.0) -> Callable:
    """F(ζ) = -2i/(i+ζ)^2 · (-2ζ/(i+ζ))^{2/(p0-2)}; transports to |z-1|^{4/(p0-2)}.

    -2ζ/(i+ζ) = φ(ζ) - 1 has negative real part on the half-plane, so the
    power uses a cut on the positive real axis to stay holomorphic there.
    """
    if not p0 > 2:
        raise InvalidInput("p0 must exceed 2")
    e = 2.0 / (p0 - 2.0)

    def F(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return -2j / (1j + zeta) ** 2 * _pow_positive_cut(-2 * zeta / (1j + zeta), e)

    return F


def zeta_power_F(p0: float = 5.0) -> Callable:
    """F(ζ) = ζ^{2/(p0-2)}, principal branch (holomorphic on the half-plane)."""
    if not p0 > 2:
        raise InvalidInput("p0 must exceed 2")
    e = 2.0 / (p0 - 2.0)
    return lambda zeta: np.power(np.asarray(zeta, dtype=complex), e)


def transport_weight(F: Callable, name: str = "transported") -> HoloWeight:
    """Disc weight ω(z) = |(F∘ψ)(z) ψ'(z)|^2 for F holomorphic on the half-plane."""

    def g(z):
        z = np.asarray(z, dtype=complex)
        return F(1j * (1 - z) / (1 + z)) * (-2j / (1 + z) ** 2)

    return HoloWeight(g, name)


@dataclass(frozen=True, eq=False)
class HalfPlaneWeight:
    """
    A weight μ on the upper half-plane.

    Power-form weights ``coef * |ζ|^a * |i+ζ|^b`` keep their exponents so that
    powers of the weight (e.g. μ^{1/(1-p)}) are formed by exponent arithmetic,
    and so that integrability at the origin is decided exactly (a > -2).
    """

    evaluator: Callable
    name: str = "halfplane"
    origin_exponent: Optional[float] = None
    shift_exponent: float = 0.0
    coef: float = 1.0
    p: Optional[float] = None

    def __call__(self, zeta):
        return self.evaluator(np.asarray(zeta, dtype=complex))

    @property
    def is_power_form(self) -> bool:
        return self.origin_exponent is not None

    def power(self, e: float) -> "HalfPlaneWeight":
        if self.is_power_form:
            return power_form_weight(self.origin_exponent * e, self.shift_exponent * e,
                                     self.coef**e, name=f"({self.name})^{e:g}")
        base = self.evaluator
        return HalfPlaneWeight(lambda z: base(z) ** e, f"({self.name})^{e:g}")


def power_form_weight(a: float, b: float = 0.0, coef: float = 1.0, name: str | None = None,
                      p: float | None = None) -> HalfPlaneWeight:
    def ev(zeta):
        out = np.full(np.shape(zeta), coef, dtype=float)
        with np.errstate(divide="ignore"):
            if a:
                out = out * np.abs(zeta) ** a
            if b:
                out = out * np.abs(1j + zeta) ** b
        return out

    return HalfPlaneWeight(ev, name or f"|z|^{a:g}|i+z|^{b:g}", a, b, coef, p)


def holomorphic_halfplane_weight(F: Callable, p: float, name: str = "F") -> HalfPlaneWeight:
    """μ = |F|^{2-p} evaluated directly from F."""
    return HalfPlaneWeight(lambda z: np.abs(F(z)) ** (2.0 - p), f"|{name}|^{2 - p:g}", p=p)


def zeta_pow_weight(p0: float, p: float) -> HalfPlaneWeight:
    """|F|^{2-p} for F(ζ) = ζ^{2/(p0-2)}, i.e. |ζ|^{2(2-p)/(p0-2)}."""
    if not p0 > 2:
        raise InvalidInput("p0 must exceed 2")
    return power_form_weight(2.0 * (2.0 - p) / (p0 - 2.0), 0.0,
                             name=f"zeta_pow:p0={p0:g}@p={p:g}", p=p)
