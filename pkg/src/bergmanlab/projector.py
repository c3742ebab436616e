"""
Projection of monomials z^a z̄^b under radial weights and the L^p blow-up ratio.

For a radial weight only the rotation degree a - b survives the projection,
so everything reduces to moments:

    B(z^a z̄^b) = Φ(a)/Φ(a-b) · z^(a-b)          (a >= b, else 0)
    ‖z^a z̄^b‖_p^p = 2π Φ(p(a+b)/2)
    R_k(m) = (Φ(km)/Φ((k-1)m))^p · Φ(p(k-1)m/2) / Φ(p(k+1)m/2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import BergmanLabError, InvalidInput
from .moments import log_phi
from .weights import RadialWeight

_LOG_2PI = math.log(2.0 * math.pi)


def _check_p(p: float) -> float:
    p = float(p)
    if not (p > 1 and math.isfinite(p)):
        raise InvalidInput(f"p must lie in (1, inf), got {p}")
    return p


def _lphi(w: RadialWeight, x: float) -> float:
    return log_phi(w, x)[0]


def log_project_monomial(w: RadialWeight, a: int, b: int) -> tuple[float, int]:
    """(log coefficient, degree); the log is -inf when the projection vanishes."""
    if a < 0 or b < 0:
        raise InvalidInput("exponents must be non-negative")
    if a < b:
        return -math.inf, a - b
    if b == 0:
        return 0.0, a
    return _lphi(w, a) - _lphi(w, a - b), a - b


def project_monomial(w: RadialWeight, a: int, b: int) -> tuple[float, int]:
    """Coefficient c and degree d with B_w(z^a z̄^b) = c z^d (c = 0 when a < b)."""
    lc, d = log_project_monomial(w, a, b)
    return (0.0 if lc == -math.inf else math.exp(lc)), d


def log_lp_norm_monomial(w: RadialWeight, a: int, b: int, p: float) -> float:
    """log ‖z^a z̄^b‖_p^p."""
    p = _check_p(p)
    return _LOG_2PI + _lphi(w, 0.5 * p * (a + b))


def lp_norm_monomial(w: RadialWeight, a: int, b: int, p: float) -> float:
    """‖z^a z̄^b‖_p^p = 2π Φ(p(a+b)/2)."""
    return math.exp(log_lp_norm_monomial(w, a, b, p))


def min_k(p: float) -> int:
    """Smallest integer k > (2+p)/(2-p), for 1 < p < 2."""
    p = float(p)
    if not 1 < p < 2:
        raise InvalidInput(f"min_k needs 1 < p < 2, got {p}")
    # exact rational arithmetic so that e.g. p = 1.9 gives 40, not 39
    q = Fraction(str(p))
    bound = (2 + q) / (2 - q)
    return math.floor(bound) + 1


def log_ratio(w: RadialWeight, p: float, k: int, m: int) -> float:
    """log R_k(m), from four log-moments."""
    p = _check_p(p)
    if k < 1 or m < 1:
        raise InvalidInput("ratio needs k >= 1 and m >= 1")
    return (p * (_lphi(w, k * m) - _lphi(w, (k - 1) * m))
            + _lphi(w, 0.5 * p * (k - 1) * m) - _lphi(w, 0.5 * p * (k + 1) * m))


def ratio(w: RadialWeight, p: float, k: int, m: int) -> float:
    """R_k(m) = ‖B(z^{km} z̄^m)‖_p^p / ‖z^{km} z̄^m‖_p^p."""
    return math.exp(log_ratio(w, p, k, m))


def ratio_from_projection(w: RadialWeight, p: float, k: int, m: int) -> float:
    """R_k(m) assembled from project_monomial and lp_norm_monomial."""
    lc, d = log_project_monomial(w, k * m, m)
    num = p * lc + log_lp_norm_monomial(w, d, 0, p)
    return math.exp(num - log_lp_norm_monomial(w, k * m, m, p))


@dataclass(frozen=True)
class RatioPoint:
    m: int
    R: float
    log_R: float


@dataclass(frozen=True)
class RatioSeries:
    weight_id: str
    p: float
    k: int
    points: tuple[RatioPoint, ...]
    errors: tuple[tuple[int, str], ...] = field(default=())

    @property
    def log_values(self) -> list[float]:
        return [pt.log_R for pt in self.points]


def dyadic_grid(m_max: int) -> list[int]:
    """{1, 2, 4, ..., <= m_max}."""
    if m_max < 1:
        raise InvalidInput("m_max must be >= 1")
    return [2**j for j in range(int(math.log2(m_max)) + 1)]


def ratio_sweep(w: RadialWeight, p: float, k: int | None, m_grid: Iterable[int]) -> RatioSeries:
    """R_k(m) over ``m_grid``; points that fail are recorded and skipped.

    ``k`` defaults to ``min_k(p)``. For p > 2 the sweep runs but carries no
    claim: the blow-up argument is for 1 < p < 2 and reaches p > 2 by duality.
    """
    p = _check_p(p)
    if k is None:
        k = min_k(p)
    points, errors = [], []
    for m in m_grid:
        try:
            lr = log_ratio(w, p, k, int(m))
        except BergmanLabError as exc:
            errors.append((int(m), f"{type(exc).__name__}: {exc}"))
            continue
        points.append(RatioPoint(int(m), math.exp(lr), lr))
    return RatioSeries(w.name, p, k, tuple(points), tuple(errors))
