"""
The A_p^+ quantity on the upper half-plane and sweeps over discs centred on ℝ.

For a disc D = D(x0, R) with x0 real the quantity is

    Q_p(μ, D) = |D⁺|^(-p) · ∫_{D⁺} μ · (∫_{D⁺} μ^(1/(1-p)))^(p-1),   D⁺ = D ∩ {Im ζ > 0},

and μ satisfies the condition when Q_p is bounded over all such discs. A sweep
can only sample discs, so it gives evidence, not a certificate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import numerics
from .errors import DivergentIntegral, InvalidInput
from .numerics import Disc
from .weights import HalfPlaneWeight, power_form_weight

DEFAULT_TOL = 1e-10


class Case(enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"


@dataclass(frozen=True)
class DiscResult:
    disc: Disc
    quantity: float          # math.inf marks a divergent verdict
    err: float
    case: Case

    @property
    def divergent(self) -> bool:
        return math.isinf(self.quantity)

    @property
    def verdict(self) -> str:
        return "divergent" if self.divergent else "finite"


@dataclass(frozen=True)
class ApReport:
    weight_id: str
    p: float
    per_disc: tuple[DiscResult, ...]
    supremum: float          # over finite quantities
    argmax: Disc | None
    divergent: bool

    @property
    def verdict(self) -> str:
        return "divergent" if self.divergent else "finite"


def _origin_in_region(d: Disc) -> bool:
    return abs(d.x0) <= d.R


def _integral(mu: HalfPlaneWeight, d: Disc, tol: float) -> tuple[float, float]:
    """(value, abs error) of ∫_{D⁺} μ; raises DivergentIntegral."""
    if mu.is_power_form and mu.origin_exponent == 0 and mu.shift_exponent == 0:
        return mu.coef * d.half_area, 0.0
    if mu.is_power_form:
        if _origin_in_region(d) and mu.origin_exponent <= -2:
            raise DivergentIntegral(f"|ζ|^{mu.origin_exponent:g} is not integrable at 0")
        # exponent > -2: integrable, so the shell heuristic is not needed
        res = numerics.integrate_half_disc(mu, d, tol=0.0, rtol=tol, check_divergence=False)
    else:
        res = numerics.integrate_half_disc(mu, d, tol=0.0, rtol=tol)
    return res.value, res.abs_error_estimate


def ap_detail(mu: HalfPlaneWeight, p: float, d: Disc, tol: float = DEFAULT_TOL) -> DiscResult:
    """Q_p(μ, D) with error estimate and case label (quantity = inf when divergent)."""
    p = float(p)
    if not p > 1:
        raise InvalidInput(f"A_p^+ needs p > 1, got {p}")
    conj = mu.power(1.0 / (1.0 - p))
    try:
        i1, e1 = _integral(mu, d, tol)
        i2, e2 = _integral(conj, d, tol)
    except DivergentIntegral:
        return DiscResult(d, math.inf, 0.0, case_classifier(d))
    log_q = -p * math.log(d.half_area) + math.log(i1) + (p - 1.0) * math.log(i2)
    q = math.exp(log_q)
    rel = e1 / i1 + (p - 1.0) * e2 / i2
    return DiscResult(d, q, q * rel, case_classifier(d))


def ap_quantity(mu: HalfPlaneWeight, p: float, d: Disc, tol: float = DEFAULT_TOL) -> float:
    """Left side of the A_p^+ inequality for one disc; math.inf when an integral diverges.

    NonConvergence (a numeric failure) propagates and is never reported as inf.
    """
    return ap_detail(mu, p, d, tol).quantity


def disc_family(depth: int) -> list[Disc]:
    """Centres {0, ±2^j} and radii {2^j} for j in [-depth, depth]."""
    if depth < 0:
        raise InvalidInput("grid depth must be >= 0")
    js = range(-depth, depth + 1)
    centres = [0.0] + [s * 2.0**j for j in js for s in (-1.0, 1.0)]
    return [Disc(x0, 2.0**j) for x0 in centres for j in js]


def ap_sweep(mu: HalfPlaneWeight, p: float, depth: int = 6, tol: float = 1e-8) -> ApReport:
    """Evaluate Q_p over ``disc_family(depth)``; any divergent disc marks the report divergent."""
    results = tuple(ap_detail(mu, p, d, tol) for d in disc_family(depth))
    finite = [r for r in results if not r.divergent]
    best = max(finite, key=lambda r: r.quantity, default=None)
    return ApReport(mu.name, float(p), results,
                    best.quantity if best else math.nan,
                    best.disc if best else None,
                    any(r.divergent for r in results))


def appendix_a_weight(p0: float, p: float) -> HalfPlaneWeight:
    """|ζ|^((4-2p)/(p0-2)) · |i+ζ|^((2p-4)(p0-1)/(p0-2)), comparable to |F|^(2-p)."""
    if not p0 > 2:
        raise InvalidInput(f"p0 must exceed 2, got {p0}")
    if not p > 1:
        raise InvalidInput(f"p must exceed 1, got {p}")
    a = (4.0 - 2.0 * p) / (p0 - 2.0)
    b = (2.0 * p - 4.0) * (p0 - 1.0) / (p0 - 2.0)
    return power_form_weight(a, b, name=f"appendixA:p0={p0:g}@p={p:g}", p=p)


appendixA_weight = appendix_a_weight


def case_classifier(d: Disc) -> Case:
    """Case1/Case2 when D meets D(0, 2R) (i.e. |x0| < 3R) with R < 2 / R >= 2; else Case3."""
    if abs(d.x0) < 3.0 * d.R:
        return Case.CASE1 if d.R < 2.0 else Case.CASE2
    return Case.CASE3
