"""
Bergman kernels on the disc and the upper half-plane.

* the unweighted disc kernel in closed form,
* radial-weight kernels from their orthogonal series Σ (z w̄)^n / (2πΦ(n)),
* the half-plane kernel through the Cayley transform,
* finite-rank kernels K_N of span{1, z, ..., z^N} in L²(μ) for arbitrary
  (non-radial) μ, from the Gram matrix of monomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy import integrate, linalg

from . import numerics
from .errors import IllConditioned, InvalidInput, NonConvergence
from .moments import log_phi
from .numerics import TruncationPolicy
from .weights import (HoloWeight, RadialWeight, cayley, cayley_derivative,
                      inverse_cayley, inverse_cayley_derivative)

MAX_MODULUS = 0.95
MAX_GRAM_DEGREE = 40
COND_LIMIT = 1e12


@dataclass(frozen=True)
class KernelEvaluation:
    value: complex
    terms_used: int
    tail_bound: float


# --------------------------------------------------------------------------
# disc and half-plane
# --------------------------------------------------------------------------

def disc_kernel(z, w):
    """B₁(z, w) = 1/(π(1 - z w̄)²)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    q = z * np.conj(w)
    if np.any(np.abs(q) >= 1):
        raise InvalidInput("disc kernel needs |z w̄| < 1")
    out = 1.0 / (math.pi * (1.0 - q) ** 2)
    return complex(out) if out.ndim == 0 else out


def halfplane_kernel(zeta, nu):
    """P₁(ζ, ν) = φ'(ζ) B₁(φ(ζ), φ(ν)) conj(φ'(ν))."""
    zeta = np.asarray(zeta, dtype=complex)
    nu = np.asarray(nu, dtype=complex)
    b1 = disc_kernel(cayley(zeta), cayley(nu))     # validates both points first
    out = cayley_derivative(zeta) * b1 * np.conj(cayley_derivative(nu))
    return complex(out) if np.ndim(out) == 0 else out


def halfplane_kernel_closed(zeta, nu):
    """P₁(ζ, ν) = -1/(π(ζ - ν̄)²), the closed form of the half-plane kernel."""
    zeta = np.asarray(zeta, dtype=complex)
    nu = np.asarray(nu, dtype=complex)
    out = -1.0 / (math.pi * (zeta - np.conj(nu)) ** 2)
    return complex(out) if np.ndim(out) == 0 else out


def disc_kernel_via_halfplane(z, w):
    """ψ'(z) P₁(ψ(z), ψ(w)) conj(ψ'(w)); equals B₁(z, w)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    out = (inverse_cayley_derivative(z) * halfplane_kernel(inverse_cayley(z), inverse_cayley(w))
           * np.conj(inverse_cayley_derivative(w)))
    return complex(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# radial weights
# --------------------------------------------------------------------------

def _check_interior(max_modulus: float, *pts):
    for p in pts:
        if abs(p) > max_modulus:
            raise InvalidInput(f"|{p}| exceeds the evaluation limit {max_modulus}")


def radial_kernel(wt: RadialWeight, z: complex, w: complex,
                  policy: TruncationPolicy = TruncationPolicy(),
                  max_modulus: float = MAX_MODULUS) -> KernelEvaluation:
    """Σ_n (z w̄)^n / (2πΦ(n)), truncated by ``policy``.

    The tail bound is geometric, |t_N| ρ/(1-ρ), with ρ the larger of |z w̄|
    and the last observed term ratio.
    """
    z, w = complex(z), complex(w)
    _check_interior(max_modulus, z, w)
    q = z * w.conjugate()
    if q == 0:
        return KernelEvaluation(complex(math.exp(-math.log(2 * math.pi) - log_phi(wt, 0)[0])),
                                1, 0.0)
    log_q, arg_q = math.log(abs(q)), math.atan2(q.imag, q.real)
    log_2pi = math.log(2 * math.pi)
    mags = []

    def term(n):
        lm = n * log_q - log_2pi - log_phi(wt, n)[0]
        m = math.exp(lm)
        mags.append(m)
        return m * complex(math.cos(n * arg_q), math.sin(n * arg_q))

    value, used = numerics.sum_series(term, policy)
    rho = abs(q)
    if len(mags) >= 2 and mags[-2] > 0:
        rho = max(rho, mags[-1] / mags[-2])
    tail = math.inf if rho >= 1 else mags[-1] * rho / (1.0 - rho)
    return KernelEvaluation(complex(value), used, tail)


def kernel_integral(kernel_wt: RadialWeight, measure: Callable, f: Callable, z: complex,
                    policy: TruncationPolicy = TruncationPolicy(),
                    n_theta: int = 256, tol: float = 1e-12) -> complex:
    """∫ K(z, t) f(t) ν(|t|) dA(t) with K the series kernel of ``kernel_wt`` and ν = ``measure``.

    With the series inserted, the integral becomes Σ_n z^n c_n / (2πΦ(n)) with
    c_n = ∫ f(t) t̄^n ν dA; the angular parts of all c_n come from one FFT per
    radius and the radial integrals from an adaptive vector quadrature.
    """
    z = complex(z)
    _check_interior(MAX_MODULUS, z)
    th = 2 * math.pi * np.arange(n_theta) / n_theta
    nmax = n_theta // 2
    ns = np.arange(nmax)

    def radial(r):
        vals = np.asarray(f(r * np.exp(1j * th)), dtype=complex)
        if vals.ndim == 0:
            vals = np.full(n_theta, complex(vals))
        # ∫ f(r e^{iθ}) e^{-inθ} dθ
        ang = 2 * math.pi * np.fft.fft(vals)[:nmax] / n_theta
        return ang * r ** (ns + 1) * float(measure(r))

    coeff, _ = integrate.quad_vec(radial, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=400)
    rs = np.linspace(0.0, 1.0, 65)
    sup_f = float(np.max(np.abs(np.asarray(f(rs[:, None] * np.exp(1j * th[None, :]))))))
    sup_nu = float(np.max(measure(rs)))

    def term(n):
        if n >= nmax:
            raise NonConvergence("kernel series needs more angular modes")
        return z**n * coeff[n] / (2 * math.pi * math.exp(log_phi(kernel_wt, n)[0]))

    def bound(n, t):
        # |c_n| <= sup|f| sup ν · 2π/(n+2); leading coefficients may vanish exactly
        return (abs(z) ** n * sup_f * sup_nu / (n + 2)
                * math.exp(-log_phi(kernel_wt, n)[0]))

    value, _ = numerics.sum_series(term, policy, magnitude=bound)
    return complex(value)


def project_numeric(wt: RadialWeight, f: Callable, z: complex,
                    policy: TruncationPolicy = TruncationPolicy(),
                    n_theta: int = 256, tol: float = 1e-12) -> complex:
    """(B_λ f)(z) = ∫ B_λ(z, w) f(w) λ(|w|) dA(w) by quadrature against the kernel series."""
    return kernel_integral(wt, wt, f, z, policy, n_theta, tol)


# --------------------------------------------------------------------------
# finite-rank kernels from Gram matrices
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GramKernel:
    """Reproducing kernel of span{1, ..., z^N} in L²(μ).

    ``gram[m, n] = ∫ z^m conj(z^n) μ dA``. Then
    K_N(z, w) = v(z)ᵀ conj(G)^{-1} conj(v(w)) with v = (1, z, ..., z^N).
    """

    weight_id: str
    degree: int
    gram: np.ndarray
    cond: float
    _chol: tuple

    def _solve(self, b):
        return linalg.cho_solve(self._chol, b)

    def __call__(self, z, w) -> complex:
        vz = np.power(complex(z), np.arange(self.degree + 1))
        vw = np.power(complex(w), np.arange(self.degree + 1))
        return complex(vz @ np.conj(self._solve(vw)))

    def project_coefficients(self, b: np.ndarray) -> np.ndarray:
        """Coefficients c of the projection Σ c_m z^m, given b_k = ⟨f, z^k⟩_μ."""
        # conj(G) c = b  <=>  G conj(c) = conj(b)
        return np.conj(self._solve(np.conj(np.asarray(b, dtype=complex))))


def _poly_moment(coeffs, a: int, b: int) -> complex:
    """∫ z^a z̄^b |g|² dA for polynomial g."""
    c = np.asarray(coeffs, dtype=complex)
    s = 0j
    for j in range(len(c)):
        k = a + j - b
        if 0 <= k < len(c):
            s += c[j] * np.conj(c[k]) * math.pi / (a + j + 1)
    return s


def _poly_gram(coeffs, N: int) -> np.ndarray:
    """Exact Gram matrix for ω = |g|² with polynomial g."""
    return np.array([[_poly_moment(coeffs, m, n) for n in range(N + 1)] for m in range(N + 1)])


def _quadrature_gram(mu: Callable, N: int, tol: float) -> np.ndarray:
    """Gram matrix by Gauss-Legendre in r times the trapezoid rule in θ, refined until stable."""
    n_r, n_th = N + 24, 2 * N + 64
    prev = None
    for _ in range(6):
        x, wr = np.polynomial.legendre.leggauss(n_r)
        r = 0.5 * (x + 1)
        wr = 0.5 * wr
        th = 2 * math.pi * np.arange(n_th) / n_th
        z = r[:, None] * np.exp(1j * th[None, :])
        wgt = np.asarray(mu(z), dtype=float) * (r * wr)[:, None] * (2 * math.pi / n_th)
        V = z[..., None] ** np.arange(N + 1)        # (n_r, n_th, N+1)
        V = V.reshape(-1, N + 1)
        G = (V * wgt.reshape(-1, 1)).T @ np.conj(V)
        if prev is not None and np.max(np.abs(G - prev)) <= tol * np.max(np.abs(G)):
            return G
        prev = G
        n_r, n_th = 2 * n_r, 2 * n_th
    raise NonConvergence(f"Gram quadrature not stable to {tol:g}")


def build_gram_kernel(mu, N: int, tol: float = 1e-12, name: str | None = None) -> GramKernel:
    """Gram kernel for a disc weight.

    ``mu`` is a HoloWeight (exact moments when its g is a polynomial), a
    RadialWeight, or any vectorised callable z -> μ(z) >= 0.
    """
    if not 0 <= N <= MAX_GRAM_DEGREE:
        raise InvalidInput(f"Gram degree must be in 0..{MAX_GRAM_DEGREE}")
    if isinstance(mu, HoloWeight) and mu.coeffs is not None:
        G = _poly_gram(mu.coeffs, N)
    elif isinstance(mu, RadialWeight):
        G = _quadrature_gram(lambda z: mu(np.abs(z)), N, tol)
    else:
        G = _quadrature_gram(mu, N, tol)
    G = 0.5 * (G + G.conj().T)
    ev = np.linalg.eigvalsh(G)
    cond = math.inf if ev[0] <= 0 else float(ev[-1] / ev[0])
    if cond > COND_LIMIT:
        raise IllConditioned(f"Gram matrix of degree {N} has condition number {cond:.3g}")
    try:
        chol = linalg.cho_factor(G, lower=True)
    except linalg.LinAlgError as exc:
        raise IllConditioned(f"Cholesky failed at degree {N}: {exc}") from exc
    label = name or getattr(mu, "name", "mu")
    return GramKernel(label, N, G, cond, chol)


def factorization_defect(g: HoloWeight, K: GramKernel, z, w) -> float:
    """|g(z) K_N(z, w) conj(g(w)) - B₁(z, w)|."""
    gz = complex(g.g(np.asarray(complex(z))))
    gw = complex(g.g(np.asarray(complex(w))))
    return abs(gz * K(z, w) * gw.conjugate() - disc_kernel(complex(z), complex(w)))


def _b1_monomial(A: int, B: int) -> tuple[float, int]:
    """Unweighted projection of z^A z̄^B: ((A-B+1)/(A+1), A-B), or (0, .) when A < B."""
    if A < B:
        return 0.0, A - B
    return (A - B + 1) / (A + 1), A - B


def operator_relation_check(g: HoloWeight, f: Mapping[tuple[int, int], complex],
                            points, N: int) -> float:
    """max over ``points`` of |g (B_ω f) - B₁(f g)| for ω = |g|² and polynomial g.

    ``f`` maps (a, b) to the coefficient of z^a z̄^b. B_ω uses the degree-N
    Gram kernel with exact moments; B₁(fg) uses the exact unweighted
    projection of each monomial.
    """
    if g.coeffs is None:
        raise InvalidInput("operator_relation_check needs a polynomial g")
    K = build_gram_kernel(g, N)
    b = np.array([sum(c * _poly_moment(g.coeffs, a, bb + k) for (a, bb), c in f.items())
                  for k in range(N + 1)])
    coef = K.project_coefficients(b)
    gc = np.asarray(g.coeffs, dtype=complex)
    worst = 0.0
    for z in np.atleast_1d(np.asarray(points, dtype=complex)):
        lhs = complex(g.g(np.asarray(z))) * np.polyval(coef[::-1], z)
        rhs = 0j
        for (a, bb), c in f.items():
            for j, cj in enumerate(gc):
                k, d = _b1_monomial(a + j, bb)
                if k:
                    rhs += c * cj * k * z**d
        worst = max(worst, abs(lhs - rhs))
    return float(worst)
