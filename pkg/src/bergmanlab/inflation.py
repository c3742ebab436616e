"""
Hartogs domains Ω = {(z, w) : z ∈ 𝔻, |w|² < μ(z)} and their Bergman kernels.

The kernel of Ω expands in the fibre variable as

    B_Ω[(z,w),(t,s)] = (1/2π) Σ_m (2m+2) w^m K_m(z,t) s̄^m,

where K_m is the Bergman kernel of 𝔻 for the weight μ^(m+1). For radial μ each
K_m is itself a moment series; for μ = |g|² the K_m are available both from
Gram matrices and in closed form B₁/(g^(m+1) conj(g)^(m+1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np

from . import numerics
from .errors import InvalidInput, NonConvergence
from .kernels import (KernelEvaluation, build_gram_kernel, disc_kernel, kernel_integral,
                      radial_kernel)
from .numerics import TruncationPolicy
from .projector import project_monomial
from .weights import HoloWeight, RadialWeight, _pow_positive_cut, make_dostanic

GRAM_LEVELS = 8
MAX_FIBRE_RATIO = 0.95

Weight = Union[RadialWeight, HoloWeight]


@dataclass(eq=False)
class HartogsDomain:
    """Ω over a radial weight λ(|z|) or a weight |g(z)|²."""

    base_weight: Weight
    _powers: dict = field(default_factory=dict, repr=False)

    @property
    def name(self) -> str:
        return f"hartogs[{self.base_weight.name}]"

    @property
    def is_radial(self) -> bool:
        return isinstance(self.base_weight, RadialWeight)

    def mu(self, z):
        z = np.asarray(z, dtype=complex)
        if self.is_radial:
            return self.base_weight(np.abs(z))
        return self.base_weight(z)

    def membership(self, z, w) -> bool:
        z, w = complex(z), complex(w)
        return abs(z) < 1 and abs(w) ** 2 < float(self.mu(z))

    def kernel_weight(self, m: int) -> RadialWeight:
        """The radial weight λ^(m+1) whose kernel is K_m (built once per m)."""
        if not self.is_radial:
            raise InvalidInput("kernel_weight needs a radial base weight")
        if m not in self._powers:
            w = self.base_weight
            trivial = w.family == "power" and w.params["t"] == 0 and w.scale == 1.0
            self._powers[m] = w if (m == 0 or trivial) else w.power(m + 1)
        return self._powers[m]


def make_domain(mu: Weight) -> HartogsDomain:
    if not isinstance(mu, (RadialWeight, HoloWeight)):
        raise InvalidInput("make_domain needs a RadialWeight or a HoloWeight")
    return HartogsDomain(mu)


def omega_p0_weight(p0: float) -> HoloWeight:
    """|z - 1|^(4/(p0-2)) written as |g|² with g = (z-1)^(2/(p0-2))."""
    if not p0 > 2:
        raise InvalidInput("p0 must exceed 2")
    e = 2.0 / (p0 - 2.0)
    # Re(z - 1) < 0 on the disc, so the cut goes on the positive axis
    return HoloWeight(lambda z: _pow_positive_cut(np.asarray(z, dtype=complex) - 1.0, e),
                      f"omega_p0:p0={p0:g}")


def omega_p0_domain(p0: float) -> HartogsDomain:
    return make_domain(omega_p0_weight(p0))


def omega_dostanic_domain(A: float, B: float, alpha: float) -> HartogsDomain:
    return make_domain(make_dostanic(A, B, alpha))


def _check_inside(d: HartogsDomain, *pts):
    for z, w in pts:
        if not d.membership(z, w):
            raise InvalidInput(f"({z}, {w}) is not inside {d.name}")


def hartogs_kernel(d: HartogsDomain, zw: tuple, ts: tuple,
                   policy: TruncationPolicy = TruncationPolicy()) -> KernelEvaluation:
    """B_Ω[(z,w),(t,s)] for radial μ by the fibre series.

    The outer sum stops once (2m+2)|w s̄|^m sup|K_m| / 2π stays below
    ``policy.tail_tol`` for ``policy.consecutive_small`` terms, with
    sup|K_m| ≤ K_m(ρ, ρ), ρ = max(|z|, |t|). The reported tail bound adds the
    inner tail bounds to a geometric estimate of the outer remainder.
    """
    if not d.is_radial:
        raise InvalidInput("hartogs_kernel needs a radial base weight")
    (z, w), (t, s) = (complex(zw[0]), complex(zw[1])), (complex(ts[0]), complex(ts[1]))
    _check_inside(d, (z, w), (t, s))
    q = w * s.conjugate()
    rho = max(abs(z), abs(t))
    inner_tail = 0.0
    inner_terms = 0
    sizes = []

    def term(m):
        nonlocal inner_tail, inner_terms
        if m > 0 and q == 0:
            sizes.append(0.0)
            return 0j
        wt = d.kernel_weight(m)
        k = radial_kernel(wt, z, t, policy)
        coef = (2 * m + 2) / (2 * math.pi) * q**m
        inner_tail += abs(coef) * k.tail_bound
        inner_terms += k.terms_used
        sup_k = abs(radial_kernel(wt, rho, rho, policy).value) if rho > 0 else abs(k.value)
        sizes.append(abs(coef) * sup_k)
        return coef * k.value

    value, used = numerics.sum_series(term, policy, magnitude=lambda m, _: sizes[m])
    outer = 0.0
    if q != 0 and len(sizes) >= 2 and sizes[-2] > 0:
        r = sizes[-1] / sizes[-2]
        outer = math.inf if r >= 1 else sizes[-1] * r / (1 - r)
    return KernelEvaluation(complex(value), inner_terms, inner_tail + outer)


def slice_identity_defect(d: HartogsDomain, z: complex, t: complex,
                          policy: TruncationPolicy = TruncationPolicy()) -> float:
    """|π B_Ω[(z,0),(t,0)] - B_μ(z,t)|."""
    lhs = hartogs_kernel(d, (z, 0), (t, 0), policy)
    rhs = radial_kernel(d.base_weight, z, t, policy)
    return abs(math.pi * lhs.value - rhs.value)


def slice_tail_bound(d: HartogsDomain, z: complex, t: complex,
                     policy: TruncationPolicy = TruncationPolicy()) -> float:
    """Combined truncation bound of the two sides of the slice identity."""
    lhs = hartogs_kernel(d, (z, 0), (t, 0), policy)
    rhs = radial_kernel(d.base_weight, z, t, policy)
    return math.pi * lhs.tail_bound + rhs.tail_bound


def _monomial(a: int, b: int) -> Callable:
    return lambda t: np.asarray(t, dtype=complex) ** a * np.conj(np.asarray(t, dtype=complex)) ** b


def lifted_projection(d: HartogsDomain, a: int, b: int, z: complex,
                      policy: TruncationPolicy = TruncationPolicy()) -> complex:
    """B_Ω F(z, 0) for F(z, w) = z^a z̄^b, by quadrature over Ω.

    At w = 0 only the m = 0 fibre term survives, and that term does not
    depend on s, so the s-integral over the fibre {|s|² < μ(t)} contributes its
    area π μ(t):

        B_Ω F(z,0) = ∫_𝔻 (1/2π)·2·K_0(z,t) f(t) · π μ(t) dA(t).
    """
    if not d.is_radial:
        raise InvalidInput("lifted_projection needs a radial base weight")
    k0 = d.kernel_weight(0)
    slice_factor = (2.0 / (2 * math.pi)) * math.pi
    return slice_factor * kernel_integral(k0, d.base_weight, _monomial(a, b), z, policy)


def lifted_projection_defect(d: HartogsDomain, f: tuple[int, int], z: complex,
                             policy: TruncationPolicy = TruncationPolicy()) -> float:
    """|B_Ω F(z,0) - B_μ f(z)| with F(z,w) = f(z) = z^a z̄^b."""
    a, b = f
    c, deg = project_monomial(d.base_weight, a, b)
    rhs = c * complex(z) ** deg if c else 0j
    return abs(lifted_projection(d, a, b, z, policy) - rhs)


def fibre_components(d: HartogsDomain, f: tuple[int, int], j: int, z: complex, m_max: int,
                     n_angle: int = 64,
                     policy: TruncationPolicy = TruncationPolicy()) -> np.ndarray:
    """Coefficients of w^m, m = 0..m_max, in B_Ω F(z, w) for F = z^a z̄^b · w^j.

    The fibre integral ∫_{|s|<√μ(t)} s̄^m s^j dA(s) is done with the trapezoid
    rule in arg s (radial part exact), so orthogonality in the fibre is
    computed, not assumed.
    """
    if not d.is_radial:
        raise InvalidInput("fibre_components needs a radial base weight")
    th = 2 * math.pi * np.arange(n_angle) / n_angle
    f_t = _monomial(*f)
    out = np.zeros(m_max + 1, dtype=complex)
    for m in range(m_max + 1):
        ang = complex(np.sum(np.exp(1j * (j - m) * th)) * 2 * math.pi / n_angle)
        e = m + j + 2
        base = d.base_weight

        def measure(r, e=e):
            # ∫_0^{√μ} ρ^{m+j+1} dρ = μ^{(m+j+2)/2} / (m+j+2)
            return np.asarray(base(r)) ** (0.5 * e) / e

        integral = kernel_integral(d.kernel_weight(m), measure, f_t, z, policy)
        out[m] = (2 * m + 2) / (2 * math.pi) * ang * integral
    return out


def degree_selection_defect(d: HartogsDomain, f: tuple[int, int], j: int, z: complex,
                            m_max: int | None = None,
                            policy: TruncationPolicy = TruncationPolicy()) -> float:
    """Largest |coefficient of w^m| for m ≠ j in B_Ω(f(z) w^j)."""
    m_max = j + 3 if m_max is None else m_max
    comps = fibre_components(d, f, j, z, m_max, policy=policy)
    return float(max(abs(c) for m, c in enumerate(comps) if m != j))


def factorized_hartogs_defect(g: HoloWeight, zw: tuple, ts: tuple, N: int,
                              policy: TruncationPolicy = TruncationPolicy(),
                              gram_levels: int = GRAM_LEVELS) -> float:
    """|Σ_m (2m+2)/2π (w s̄)^m K_m(z,t) - B_ω(z,t) B₁(w/g(z), s/g(t))| for ω = |g|².

    K_m for m <= ``gram_levels`` come from degree-N Gram kernels of |g^(m+1)|²
    and beyond that from B₁/(g(z)^(m+1) conj(g(t))^(m+1)). The right side uses
    B_ω = B₁/(g(z) conj(g(t))).
    """
    (z, w), (t, s) = (complex(zw[0]), complex(zw[1])), (complex(ts[0]), complex(ts[1]))
    gz = complex(g.g(np.asarray(z)))
    gt = complex(g.g(np.asarray(t)))
    if abs(w / gz) >= MAX_FIBRE_RATIO or abs(s / gt) >= MAX_FIBRE_RATIO:
        raise InvalidInput(f"fibre points must satisfy |w/g(z)|, |s/g(t)| < {MAX_FIBRE_RATIO}")
    b1 = disc_kernel(z, t)
    q = w * s.conjugate()
    grams = {}

    def K(m):
        if m <= gram_levels:
            if m not in grams:
                grams[m] = build_gram_kernel(g.power(m + 1), N)
            return grams[m](z, t)
        return b1 / (gz ** (m + 1) * gt.conjugate() ** (m + 1))

    def term(m):
        return (2 * m + 2) / (2 * math.pi) * q**m * K(m)

    def size(m, _):
        return (2 * m + 2) / (2 * math.pi) * abs(q / (gz * gt.conjugate())) ** m * abs(b1)

    lhs, used = numerics.sum_series(term, policy, magnitude=size)
    if used >= policy.max_terms:
        raise NonConvergence("fibre series did not converge")
    rhs = b1 / (gz * gt.conjugate()) * disc_kernel(w / gz, s / gt)
    return abs(lhs - rhs)
