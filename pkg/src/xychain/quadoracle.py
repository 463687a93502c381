"""Independent numerical oracles.

Adaptive Gauss-Kronrod quadrature of the energy integral and its parameter
derivatives, and finite-difference derivatives with Richardson
extrapolation.  Nothing here touches elliptic integrals, so these routines
can certify the closed forms.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from xychain.errors import DomainError, ToleranceError

__all__ = [
    "QuadratureSpec",
    "Derivative",
    "gauss_kronrod",
    "ground_energy_integral",
    "magnetization_integral",
    "susceptibility_integral",
    "d2e_dgamma2_integral",
    "default_step",
    "fd_weights",
    "derivative",
]

# 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Stopping rule for :func:`gauss_kronrod`.

    The target is ``max(abs_tol, rel_tol * |integral|)``, never tighter than
    the round-off floor of the rule.  ``max_depth`` bounds how many times a
    single panel may be bisected, ``max_panels`` the total work.
    """

    abs_tol: float = 1e-13
    max_depth: int = 50
    rel_tol: float = 1e-14
    max_panels: int = 4000

    def __post_init__(self):
        if not self.abs_tol >= 1e-14:
            raise DomainError(f"abs_tol must be >= 1e-14 (got {self.abs_tol})")
        if not 1 <= self.max_depth <= 60:
            raise DomainError(f"max_depth must be in [1, 60] (got {self.max_depth})")


def _panel(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    y = np.asarray(f(mid + half * _NODES), dtype=float)
    kron = half * float(_KWEIGHTS @ y)
    gauss = half * float(_GWEIGHTS @ y)
    mass = abs(half) * float(_KWEIGHTS @ np.abs(y))
    return kron, abs(kron - gauss), mass


def gauss_kronrod(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec = QuadratureSpec(),
    breakpoints: Sequence[float] = (),
) -> tuple[float, float]:
    """Integrate a vectorized ``f`` over [a, b] with globally adaptive GK15.

    The panel with the largest error estimate (|K15 - G7|) is bisected until
    the summed estimate meets the tolerance.  Interior ``breakpoints`` seed
    the panel list; put them at kinks and peaks.

    Returns ``(value, error_estimate)``.  Raises :class:`ToleranceError`
    carrying both when the panel budget runs out first.
    """
    edges = sorted({a, b, *(t for t in breakpoints if a < t < b)})
    heap = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, err, mass = _panel(f, lo, hi)
        heapq.heappush(heap, (-err, lo, hi, 0, value, mass))
    panels = len(heap)
    error = sum(-item[0] for item in heap)
    while True:
        if error <= spec.abs_tol or panels % 64 == 0 or panels >= spec.max_panels:
            # running sums drift; re-sum exactly before deciding
            total = math.fsum(item[4] for item in heap)
            error = math.fsum(-item[0] for item in heap)
            mass = math.fsum(item[5] for item in heap)
            target = max(spec.abs_tol, spec.rel_tol * abs(total), 50.0 * _EPS * mass)
            if error <= target:
                return total, error
        neg_err, lo, hi, depth, _, _ = heap[0]
        if depth >= spec.max_depth or panels >= spec.max_panels:
            total = math.fsum(item[4] for item in heap)
            raise ToleranceError(
                f"quadrature stopped after {panels} panels with error {error:.3g}",
                estimate=total,
                error=error,
            )
        heapq.heappop(heap)
        error += neg_err
        mid = 0.5 * (lo + hi)
        for left, right in ((lo, mid), (mid, hi)):
            value, err, mass = _panel(f, left, right)
            heapq.heappush(heap, (-err, left, right, depth + 1, value, mass))
            error += err
        panels += 1


def _fold(alpha, gamma):
    return abs(float(alpha)), abs(float(gamma))


def _detuning(alpha, t):
    # alpha - cos t without cancellation near t = 0, alpha = 1
    return (alpha - 1.0) + 2.0 * np.sin(0.5 * t) ** 2


def _breaks(alpha):
    return (math.acos(alpha),) if alpha < 1.0 else ()


def _integrate(integrand, alpha, spec):
    value, _ = gauss_kronrod(integrand, 0.0, math.pi, spec, _breaks(alpha))
    return value / (2.0 * math.pi)


def ground_energy_integral(alpha: float, gamma: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Energy per site, -(1/2pi) int_0^pi sqrt((a - cos t)^2 + g^2 sin^2 t) dt."""
    alpha, gamma = _fold(alpha, gamma)

    def integrand(t):
        return np.hypot(_detuning(alpha, t), gamma * np.sin(t))

    return -_integrate(integrand, alpha, spec)


def magnetization_integral(alpha: float, gamma: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """-d(energy)/d(alpha) by differentiating under the integral sign."""
    sign = math.copysign(1.0, alpha)
    alpha, gamma = _fold(alpha, gamma)

    def integrand(t):
        a = _detuning(alpha, t)
        lam = np.hypot(a, gamma * np.sin(t))
        return np.divide(a, lam, out=np.zeros_like(lam), where=lam > 0)

    return sign * _integrate(integrand, alpha, spec)


def susceptibility_integral(alpha: float, gamma: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """-d^2(energy)/d(alpha)^2 = (1/2pi) int g^2 sin^2 t / Lambda^3 dt."""
    alpha, gamma = _fold(alpha, gamma)

    def integrand(t):
        s = gamma * np.sin(t)
        lam = np.hypot(_detuning(alpha, t), s)
        return np.divide(s * s, lam**3, out=np.zeros_like(lam), where=lam > 0)

    return _integrate(integrand, alpha, spec)


def d2e_dgamma2_integral(alpha: float, gamma: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """d^2(energy)/d(gamma)^2 = -(1/2pi) int sin^2 t (a - cos t)^2 / Lambda^3 dt.

    For alpha < 1 the field is replaced by cos(arccos(alpha)), which differs
    from alpha by about one ulp; in exchange the bump at the Fermi point is
    free of cancellation.
    """
    alpha, gamma = _fold(alpha, gamma)
    if gamma == 0.0 and alpha < 1.0:
        raise DomainError("d2e/dgamma2 diverges on the isotropy line for alpha < 1")

    breaks = list(_breaks(alpha))
    if breaks:
        t0 = breaks[0]
        alpha = math.cos(t0)

        def detuning(t):
            # cos t0 - cos t as a product: relative accuracy near the peak
            return 2.0 * np.sin(0.5 * (t + t0)) * np.sin(0.5 * (t - t0))
    else:

        def detuning(t):
            return _detuning(alpha, t)

    def integrand(t):
        a = detuning(t)
        s = np.sin(t)
        lam = np.hypot(a, gamma * s)
        return np.divide((s * a) ** 2, lam**3, out=np.zeros_like(lam), where=lam > 0)

    # the integrand is a bump of width ~gamma at t = arccos(alpha)
    if breaks and gamma > 0:
        t0 = breaks[0]
        breaks += [t0 - 10 * gamma, t0 - gamma, t0 + gamma, t0 + 10 * gamma]
    value, _ = gauss_kronrod(integrand, 0.0, math.pi, spec, breaks)
    return -value / (2.0 * math.pi)


def fd_weights(offsets: Sequence[float], order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at 0.

    Fornberg's recursion on arbitrary (distinct) stencil ``offsets`` in units
    of the step; divide the weighted sum by ``h**order``.
    """
    x = np.asarray(offsets, dtype=float)
    n = len(x) - 1
    if order > n:
        raise DomainError(f"{len(x)} points cannot resolve derivative order {order}")
    c = np.zeros((n + 1, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0]
    for i in range(1, n + 1):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


class Derivative(NamedTuple):
    value: float
    error: float


def default_step(order: int) -> float:
    """Base step for unit-scale functions; higher orders need wider stencils
    to keep round-off (~eps / h^order) below the truncation error."""
    return 1e-2 if order <= 2 else 0.1 * (order - 2)


def derivative(
    f: Callable[[float], float],
    x: float,
    order: int,
    h0: float | None = None,
    side: int = 0,
    levels: int = 4,
    accuracy: int = 2,
) -> Derivative:
    """Finite-difference derivative of ``f`` at ``x`` with Richardson extrapolation.

    Args:
        f: scalar function of one float.
        x: evaluation point.
        order: derivative order, 1 to 6.
        h0: largest step; the stencil is re-evaluated at h0/2, h0/4, ...
        side: 0 for a central stencil, +1 (points at x, x+h, ...) or -1
            (points at x, x-h, ...) for one-sided stencils that never cross x.
        levels: number of step sizes in the extrapolation table.
        accuracy: for one-sided stencils, the order in h of the base stencil
            (``order + accuracy`` points).  Central stencils are O(h^2).

    Returns:
        ``Derivative(value, error)``.  The error is the spread between the
        last two extrapolation columns and rows, an empirical estimate only.
    """
    if not 1 <= order <= 6:
        raise DomainError(f"derivative order must be in 1..6 (got {order})")
    if side not in (-1, 0, 1):
        raise DomainError(f"side must be -1, 0 or +1 (got {side})")
    if levels < 2:
        raise DomainError("need at least two step sizes to extrapolate")
    h0 = default_step(order) if h0 is None else float(h0)

    if side == 0:
        half = (order + 1) // 2
        offsets = np.arange(-half, half + 1, dtype=float)
        p0, dp = 2, 2
    else:
        offsets = side * np.arange(order + accuracy, dtype=float)
        p0, dp = accuracy, 1
    weights = fd_weights(offsets, order)

    table = np.zeros((levels, levels))
    for i in range(levels):
        h = h0 / 2**i
        values = np.array([f(x + s * h) for s in offsets], dtype=float)
        table[i, 0] = float(weights @ values) / h**order
        for j in range(1, i + 1):
            factor = 2.0 ** (p0 + (j - 1) * dp)
            table[i, j] = table[i, j - 1] + (table[i, j - 1] - table[i - 1, j - 1]) / (factor - 1.0)
    best = table[-1, -1]
    error = max(abs(best - table[-1, -2]), abs(best - table[-2, -2]))
    return Derivative(float(best), float(error))
