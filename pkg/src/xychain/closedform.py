"""Closed-form ground-state quantities of the XY chain in a transverse field.

The energy per site is

    eps(alpha, gamma) = -(1/2pi) int_0^pi sqrt((alpha - cos t)^2 + gamma^2 sin^2 t) dt

and has a three-branch representation in complete elliptic integrals:
inside the disorder circle alpha^2 + gamma^2 < 1, in the annulus between the
circle and alpha = 1, and in the strong-field region alpha > 1.  Every
function here folds alpha and gamma to nonnegative values first; the energy
is even in both.

All elliptic integrals are evaluated through their complementary parameter
(``*_mc`` functions), computed in factored form, so the formulas stay
accurate up to the boundaries of each branch.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from xychain.elliptic import (
    carlson_rj,
    e_true_derivative_at_zero,
    ellip_e_mc,
    ellip_k_mc,
    ellip_pi_mc,
)
from xychain.errors import DivergenceError, DomainError

__all__ = [
    "BOUNDARY_TOL",
    "ModelParams",
    "PhaseRegion",
    "chi_expansion_near_critical",
    "circle_derivative",
    "classify",
    "d2e_dalpha2",
    "d2e_dgamma2_expansion",
    "ground_energy",
    "magnetization",
    "susceptibility",
]

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """A point of the phase diagram: transverse field and anisotropy."""

    alpha: float
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.gamma)):
            raise DomainError(f"non-finite parameters ({self.alpha}, {self.gamma})")
        if abs(self.gamma) > 1.0:
            raise DomainError(f"anisotropy must lie in [-1, 1] (got {self.gamma})")

    def folded(self) -> tuple[float, float]:
        return abs(self.alpha), abs(self.gamma)


class PhaseRegion(enum.Enum):
    DISK_INTERIOR = "DiskInterior"
    ANNULUS_WEAK_FIELD = "AnnulusWeakField"
    STRONG_FIELD = "StrongField"
    CIRCLE_BOUNDARY = "CircleBoundary"
    CRITICAL_LINE = "CriticalLine"
    ISOTROPY_LINE = "IsotropyLine"


def _params(alpha, gamma):
    p = ModelParams(float(alpha), float(gamma))
    return p.folded()


def _circle_excess(a, g):
    # a^2 + g^2 - 1 in a form that keeps relative accuracy near the circle
    return (a - 1.0) * (a + 1.0) + g * g


def classify(alpha: float, gamma: float) -> PhaseRegion:
    """Region of the phase diagram, boundaries resolved to ``BOUNDARY_TOL``.

    Boundary tags take precedence in the order: circle, alpha = 1,
    gamma = 0.  (The only point on two boundaries is (1, 0), tagged as the
    circle.)
    """
    a, g = _params(alpha, gamma)
    excess = _circle_excess(a, g)
    if abs(excess) <= BOUNDARY_TOL:
        return PhaseRegion.CIRCLE_BOUNDARY
    if abs(a - 1.0) <= BOUNDARY_TOL:
        return PhaseRegion.CRITICAL_LINE
    if g <= BOUNDARY_TOL:
        return PhaseRegion.ISOTROPY_LINE
    if excess < 0:
        return PhaseRegion.DISK_INTERIOR
    if a < 1.0:
        return PhaseRegion.ANNULUS_WEAK_FIELD
    return PhaseRegion.STRONG_FIELD


def ground_energy(alpha: float, gamma: float) -> float:
    """Ground-state energy per site (J = 1 units)."""
    a, g = _params(alpha, gamma)
    region = classify(a, g)
    one_m_a2 = (1.0 - a) * (1.0 + a)
    excess = _circle_excess(a, g)

    if region is PhaseRegion.CIRCLE_BOUNDARY:
        return -0.5
    if region is PhaseRegion.CRITICAL_LINE:
        b2 = (1.0 - g) * (1.0 + g)
        if b2 == 0.0:
            return -2.0 / math.pi
        b = math.sqrt(b2)
        return -(g + math.asin(b) / b) / math.pi
    if region is PhaseRegion.ISOTROPY_LINE:
        if a < 1.0:
            return -(math.sqrt(one_m_a2) + a * math.asin(a)) / math.pi
        return -0.5 * a

    if region is PhaseRegion.DISK_INTERIOR:
        # k^2 = (1 - a^2 - g^2) / (1 - a^2), k'^2 = g^2 / (1 - a^2)
        mc = g * g / one_m_a2
        n = -a * a / one_m_a2
        bracket = ellip_e_mc(mc) - ellip_k_mc(mc) + ellip_pi_mc(n, mc) / one_m_a2
        return -math.sqrt(one_m_a2) / math.pi * bracket
    if region is PhaseRegion.ANNULUS_WEAK_FIELD:
        # k^2 = (a^2 + g^2 - 1) / g^2, k'^2 = (1 - a^2) / g^2
        mc = one_m_a2 / (g * g)
        bracket = (
            ellip_pi_mc(a * a, mc, one_m_a2) - ellip_k_mc(mc) + g * g / one_m_a2 * ellip_e_mc(mc)
        )
        return -one_m_a2 / (math.pi * g) * bracket
    # strong field: k^2 = g^2 / (a^2 + g^2 - 1), k'^2 = (a^2 - 1) / (a^2 + g^2 - 1)
    a2_m_1 = -one_m_a2
    mc = a2_m_1 / excess
    bracket = (
        ellip_pi_mc(1.0 / (a * a), mc, a2_m_1 / (a * a)) - ellip_k_mc(mc) + excess / a2_m_1 * ellip_e_mc(mc)
    )
    return -a2_m_1 / (math.pi * math.sqrt(excess)) * bracket


def magnetization(alpha: float, gamma: float) -> float:
    """Transverse magnetization -d(eps)/d(alpha); odd in alpha.

    The Pi - K combinations are rewritten through R_J so that no branch
    divides by alpha; alpha = 0 gives 0 without a special case.
    """
    sign = math.copysign(1.0, alpha)
    a, g = _params(alpha, gamma)
    region = classify(a, g)
    one_m_a2 = (1.0 - a) * (1.0 + a)
    excess = _circle_excess(a, g)

    if region is PhaseRegion.CIRCLE_BOUNDARY:
        # limit of the disk formula at k = 0
        if a == 0.0:
            return 0.0
        value = math.asin(a) / math.pi if g == 0.0 else _disk_magnetization(a, g, one_m_a2, 1.0)
        return sign * value
    if region is PhaseRegion.CRITICAL_LINE:
        b2 = (1.0 - g) * (1.0 + g)
        if b2 == 0.0:
            return sign * 1.0 / math.pi
        b = math.sqrt(b2)
        return sign * math.asin(b) / (math.pi * b)
    if region is PhaseRegion.ISOTROPY_LINE:
        return sign * (math.asin(a) / math.pi if a < 1.0 else 0.5)

    if region is PhaseRegion.DISK_INTERIOR:
        return sign * _disk_magnetization(a, g, one_m_a2, g * g / one_m_a2)
    if region is PhaseRegion.ANNULUS_WEAK_FIELD:
        mc = one_m_a2 / (g * g)
        rj = carlson_rj(0.0, mc, 1.0, one_m_a2)
        return sign * a * one_m_a2 / (3.0 * math.pi * g) * rj
    a2_m_1 = -one_m_a2
    mc = a2_m_1 / excess
    return sign * a2_m_1 / (math.pi * a * math.sqrt(excess)) * ellip_pi_mc(1.0 / (a * a), mc, a2_m_1 / (a * a))


def _disk_magnetization(a, g, one_m_a2, mc):
    # Pi(-a^2/(1-a^2)) - (1-a^2) K = a^2 [K - R_J(0, mc, 1, 1/(1-a^2)) / (3 (1-a^2))]
    rj = carlson_rj(0.0, mc, 1.0, 1.0 / one_m_a2)
    return a / (math.pi * math.sqrt(one_m_a2)) * (ellip_k_mc(mc) - rj / (3.0 * one_m_a2))


def d2e_dalpha2(alpha: float, gamma: float) -> float:
    """Second derivative of the energy in the field, d^2 eps / d alpha^2 <= 0.

    Raises :class:`DivergenceError` on alpha = 1 and on gamma = 0, alpha < 1.
    """
    a, g = _params(alpha, gamma)
    region = classify(a, g)
    one_m_a2 = (1.0 - a) * (1.0 + a)
    excess = _circle_excess(a, g)

    if region is PhaseRegion.CRITICAL_LINE:
        raise DivergenceError(f"susceptibility diverges on alpha = 1 (alpha = {alpha})")
    if region is PhaseRegion.ISOTROPY_LINE:
        if a < 1.0:
            raise DivergenceError(f"susceptibility diverges on gamma = 0 for alpha < 1")
        return 0.0
    if region is PhaseRegion.CIRCLE_BOUNDARY:
        if g == 0.0:
            raise DivergenceError("susceptibility diverges at (alpha, gamma) = (1, 0)")
        return -1.0 / (4.0 * g)
    if region is PhaseRegion.DISK_INTERIOR:
        mc = g * g / one_m_a2
        value = (one_m_a2 * ellip_e_mc(mc) - g * g * ellip_k_mc(mc)) / (
            math.pi * math.sqrt(one_m_a2) * (-excess)
        )
        return -value
    if region is PhaseRegion.ANNULUS_WEAK_FIELD:
        mc = one_m_a2 / (g * g)
        value = g * (ellip_k_mc(mc) - ellip_e_mc(mc)) / (math.pi * excess)
        return -value
    mc = -one_m_a2 / excess
    return -(ellip_k_mc(mc) - ellip_e_mc(mc)) / (math.pi * math.sqrt(excess))


def susceptibility(alpha: float, gamma: float) -> float:
    """Transverse susceptibility chi = -d^2 eps / d alpha^2 (positive).

    Diverges (raises :class:`DivergenceError`) on the critical line
    alpha = 1 and on the isotropy line gamma = 0 with alpha < 1.
    """
    return -d2e_dalpha2(alpha, gamma)


def chi_expansion_near_critical(alpha: float, gamma: float) -> float:
    """Small-|1 - alpha| expansion of the susceptibility.

    Kept through the |1-alpha| log|1-alpha| term.  The remainder is
    O(|1-alpha|^2) for alpha > 1; on the alpha < 1 side the linear
    coefficient differs and the remainder is O(|1-alpha|).
    """
    g = abs(float(gamma))
    a = abs(float(alpha))
    if not gamma > 0:
        raise DomainError(f"expansion needs gamma > 0 (got {gamma})")
    d = abs(1.0 - a)
    if d == 0.0:
        raise DivergenceError("susceptibility diverges at alpha = 1")
    if d >= 0.2:
        raise DomainError(f"expansion only valid for |1 - alpha| < 0.2 (got {d})")
    log_g = math.log(g)
    g3 = g**3
    leading = (-0.5 * math.log(d) + math.log(2.0 * math.sqrt(2.0) * g) - 1.0) / (math.pi * g)
    linear = (8.0 - 9.0 * math.log(2.0) - g * g - 6.0 * log_g) / (4.0 * math.pi * g3) * d
    log_linear = 3.0 / (4.0 * math.pi * g3) * d * math.log(d)
    return leading + linear + log_linear


def d2e_dgamma2_expansion(alpha: float, gamma: float) -> float:
    """Small-gamma expansion of d^2 eps / d gamma^2 for alpha < 1.

    Kept through the gamma^2 log gamma^2 term; logarithmically divergent as
    gamma -> 0.
    """
    a = abs(float(alpha))
    g = abs(float(gamma))
    if a >= 1.0:
        raise DomainError("no gamma = 0 singularity for alpha >= 1; the energy is smooth there")
    if g == 0.0:
        raise DivergenceError("d2e/dgamma2 diverges logarithmically at gamma = 0")
    if g >= 0.2:
        raise DomainError(f"expansion only valid for |gamma| < 0.2 (got {gamma})")
    s2 = (1.0 - a) * (1.0 + a)
    s = math.sqrt(s2)
    asin_a = math.asin(a)
    g2 = g * g
    leading = s / math.pi * (2.0 - a / s * asin_a + math.log(g / (4.0 * s)))
    quad = (15.0 - 21.0 * a * a - 18.0 * a * s * asin_a) / (4.0 * math.pi * s) * g2
    quad_log = 9.0 * (1.0 - 2.0 * a * a) / (8.0 * math.pi * s) * math.log(g2 / (16.0 * s2)) * g2
    return leading + quad + quad_log


def circle_derivative(order: int, gamma: float) -> float:
    """d^order eps / d alpha^order on the circle alpha = sqrt(1 - gamma^2).

    Outside the circle d^2 eps/d alpha^2 = (2/(pi gamma)) E'(m) with
    m = (alpha^2 + gamma^2 - 1)/gamma^2 and E' = dE/dm; inside, the same
    expression holds with m < 0 (imaginary modulus).  Since m(alpha) is a
    quadratic, Faa di Bruno reduces to

        d^(n+2) eps = (2/(pi gamma)) sum_k n!/(k!(n-2k)!) (2 alpha)^(n-2k)
                      gamma^(-2(n-k)) E^(n-k+1)(0),

    identical from both sides, which is why the energy is smooth there.
    """
    if order < 2:
        raise DomainError(f"order must be >= 2 (got {order})")
    g = float(gamma)
    if not 0.0 < g < 1.0:
        raise DomainError(f"gamma must lie in (0, 1) (got {gamma})")
    n = order - 2
    a = math.sqrt((1.0 - g) * (1.0 + g))
    total = 0.0
    for k in range(n // 2 + 1):
        weight = math.factorial(n) / (math.factorial(k) * math.factorial(n - 2 * k))
        total += (
            weight
            * (2.0 * a) ** (n - 2 * k)
            * g ** (-2 * (n - k))
            * e_true_derivative_at_zero(n - k + 1)
        )
    return 2.0 / (math.pi * g) * total
