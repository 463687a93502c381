"""Complete elliptic integrals through Carlson's symmetric forms.

Public functions take the modulus ``k``.  The ``*_mc`` variants take the
complementary parameter ``mc = 1 - k**2`` instead; callers that know
``1 - k**2`` in closed form should use them, since forming ``k`` first and
squaring it back loses every digit of ``mc`` once ``k`` is within ~1e-8 of 1.
``mc > 1`` (a negative parameter, i.e. a purely imaginary modulus) is
accepted by the ``*_mc`` variants.

References:
    B. C. Carlson, "Numerical computation of real or complex elliptic
    integrals", Numer. Algorithms 10 (1995) 13-26.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple

from xychain.errors import DomainError

__all__ = [
    "K_MAX_MODULUS",
    "MAX_SERIES_ORDER",
    "ImaginaryModulus",
    "carlson_rc",
    "carlson_rd",
    "carlson_rf",
    "carlson_rj",
    "e_deriv_at_zero",
    "e_series_coefficient",
    "e_true_derivative_at_zero",
    "ellip_e",
    "ellip_e_mc",
    "ellip_k",
    "ellip_k_mc",
    "ellip_pi",
    "ellip_pi_mc",
    "imaginary_modulus_transform",
]

# Largest modulus for which K and Pi are evaluated; closer to 1 the
# logarithmic singularity makes raw evaluation meaningless in double
# precision and the near-critical expansions should be used instead.
K_MAX_MODULUS = 1.0 - 1e-12

# Beyond this order m! no longer fits in a double.
MAX_SERIES_ORDER = 170
_EXACT_SERIES_ORDER = 20

_RTOL = 2.0**-54
_RF_Q = (3.0 * _RTOL) ** (-1.0 / 6.0)
_RD_Q = (_RTOL / 4.0) ** (-1.0 / 6.0)


def carlson_rc(x: float, y: float) -> float:
    """R_C(x, y) = R_F(x, y, y) for x >= 0, y > 0."""
    if x < 0 or y <= 0:
        raise DomainError(f"carlson_rc needs x >= 0, y > 0 (got {x}, {y})")
    if x == y:
        return 1.0 / math.sqrt(x)
    # RC(x, y) = RC(1, 1 + e) / sqrt(x) with e = y/x - 1; the series is
    # used near e = 0 where atan/atanh lose relative accuracy.
    if x > 0:
        e = y / x - 1.0
        if abs(e) < 0.05:
            return _rc_series(e) / math.sqrt(x)
    if x < y:
        return math.acos(math.sqrt(x / y)) / math.sqrt(y - x)
    return math.acosh(math.sqrt(x / y)) / math.sqrt(x - y)


def _rc_series(e: float) -> float:
    # RC(1, 1+e) = sum_j (-e)^j / (2j + 1)
    total = 0.0
    term = 1.0
    j = 0
    while True:
        contrib = term / (2 * j + 1)
        total += contrib
        if abs(contrib) < 1e-18 * abs(total):
            return total
        term *= -e
        j += 1


def carlson_rf(x: float, y: float, z: float) -> float:
    """R_F(x, y, z); at most one of x, y, z may be zero."""
    if min(x, y, z) < 0 or (x == 0) + (y == 0) + (z == 0) > 1:
        raise DomainError(f"carlson_rf undefined at ({x}, {y}, {z})")
    a0 = (x + y + z) / 3.0
    q = _RF_Q * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    a = a0
    xm, ym, zm = x, y, z
    f = 1.0
    while f * abs(a) <= q:
        sx, sy, sz = math.sqrt(xm), math.sqrt(ym), math.sqrt(zm)
        lam = sx * sy + sx * sz + sy * sz
        xm, ym, zm = (xm + lam) / 4.0, (ym + lam) / 4.0, (zm + lam) / 4.0
        a = (a + lam) / 4.0
        f *= 4.0
    big_x = (a0 - x) / (f * a)
    big_y = (a0 - y) / (f * a)
    big_z = -(big_x + big_y)
    e2 = big_x * big_y - big_z * big_z
    e3 = big_x * big_y * big_z
    series = (
        1.0
        - e2 / 10.0
        + e3 / 14.0
        + e2 * e2 / 24.0
        - 3.0 * e2 * e3 / 44.0
        - 5.0 * e2**3 / 208.0
        + 3.0 * e3 * e3 / 104.0
        + e2 * e2 * e3 / 16.0
    )
    return series / math.sqrt(a)


def carlson_rd(x: float, y: float, z: float) -> float:
    """R_D(x, y, z); needs z > 0 and at most one of x, y zero."""
    if min(x, y) < 0 or z <= 0 or (x == 0 and y == 0):
        raise DomainError(f"carlson_rd undefined at ({x}, {y}, {z})")
    a0 = (x + y + 3.0 * z) / 5.0
    q = _RD_Q * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    a = a0
    xm, ym, zm = x, y, z
    f = 1.0
    tail = 0.0
    while f * abs(a) <= q:
        sx, sy, sz = math.sqrt(xm), math.sqrt(ym), math.sqrt(zm)
        lam = sx * sy + sx * sz + sy * sz
        tail += 1.0 / (f * sz * (zm + lam))
        xm, ym, zm = (xm + lam) / 4.0, (ym + lam) / 4.0, (zm + lam) / 4.0
        a = (a + lam) / 4.0
        f *= 4.0
    big_x = (a0 - x) / (f * a)
    big_y = (a0 - y) / (f * a)
    big_z = -(big_x + big_y) / 3.0
    xy = big_x * big_y
    zz = big_z * big_z
    e2 = xy - 6.0 * zz
    e3 = (3.0 * xy - 8.0 * zz) * big_z
    e4 = 3.0 * (xy - zz) * zz
    e5 = xy * zz * big_z
    series = _rd_rj_series(e2, e3, e4, e5)
    return series / (f * a * math.sqrt(a)) + 3.0 * tail


def carlson_rj(x: float, y: float, z: float, p: float) -> float:
    """R_J(x, y, z, p) for p > 0; at most one of x, y, z zero."""
    if min(x, y, z) < 0 or p <= 0 or (x == 0) + (y == 0) + (z == 0) > 1:
        raise DomainError(f"carlson_rj undefined at ({x}, {y}, {z}, {p})")
    a0 = (x + y + z + 2.0 * p) / 5.0
    delta = (p - x) * (p - y) * (p - z)
    q = _RD_Q * max(abs(a0 - x), abs(a0 - y), abs(a0 - z), abs(a0 - p))
    a = a0
    xm, ym, zm, pm = x, y, z, p
    f = 1.0
    tail = 0.0
    while f * abs(a) <= q:
        sx, sy, sz, sp = math.sqrt(xm), math.sqrt(ym), math.sqrt(zm), math.sqrt(pm)
        lam = sx * sy + sx * sz + sy * sz
        d = (sp + sx) * (sp + sy) * (sp + sz)
        e = delta / (f**3 * d * d)
        tail += carlson_rc(1.0, 1.0 + e) / (f * d)
        xm, ym, zm, pm = (
            (xm + lam) / 4.0,
            (ym + lam) / 4.0,
            (zm + lam) / 4.0,
            (pm + lam) / 4.0,
        )
        a = (a + lam) / 4.0
        f *= 4.0
    big_x = (a0 - x) / (f * a)
    big_y = (a0 - y) / (f * a)
    big_z = (a0 - z) / (f * a)
    big_p = -(big_x + big_y + big_z) / 2.0
    xyz = big_x * big_y * big_z
    pp = big_p * big_p
    e2 = big_x * big_y + big_x * big_z + big_y * big_z - 3.0 * pp
    e3 = xyz + 2.0 * e2 * big_p + 4.0 * pp * big_p
    e4 = (2.0 * xyz + e2 * big_p + 3.0 * pp * big_p) * big_p
    e5 = xyz * pp
    series = _rd_rj_series(e2, e3, e4, e5)
    return series / (f * a * math.sqrt(a)) + 6.0 * tail


def _rd_rj_series(e2, e3, e4, e5):
    return (
        1.0
        - 3.0 * e2 / 14.0
        + e3 / 6.0
        + 9.0 * e2 * e2 / 88.0
        - 3.0 * e4 / 22.0
        - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0
    )


def ellip_k_mc(mc: float) -> float:
    """K as a function of the complementary parameter mc = 1 - k^2 > 0."""
    if not mc > 0:
        raise DomainError(f"K diverges or is undefined for mc = {mc}")
    return carlson_rf(0.0, mc, 1.0)


def ellip_e_mc(mc: float) -> float:
    """E as a function of mc = 1 - k^2 >= 0."""
    if mc < 0:
        raise DomainError(f"E undefined for mc = {mc} (k > 1)")
    if mc == 0:
        return 1.0
    m = 1.0 - mc
    return carlson_rf(0.0, mc, 1.0) - m / 3.0 * carlson_rd(0.0, mc, 1.0)


def ellip_pi_mc(n: float, mc: float, n_complement: float | None = None) -> float:
    """Pi(n; k) with mc = 1 - k^2 > 0 and characteristic n < 1.

    ``n_complement`` is 1 - n; pass it when n is within a few ulps-worth of
    1 and the caller knows 1 - n without cancellation.
    """
    if not n < 1:
        raise DomainError(f"Pi has a pole in the integration range for n = {n}")
    if not mc > 0:
        raise DomainError(f"Pi diverges for mc = {mc}")
    p = 1.0 - n if n_complement is None else n_complement
    if not p > 0:
        raise DomainError(f"Pi has a pole in the integration range for 1 - n = {p}")
    rf = carlson_rf(0.0, mc, 1.0)
    if n == 0:
        return rf
    return rf + n / 3.0 * carlson_rj(0.0, mc, 1.0, p)


def _check_modulus(k: float, name: str, upper: float) -> None:
    if not 0.0 <= k <= upper:
        raise DomainError(f"{name}: modulus k = {k} outside [0, {upper}]")


def ellip_k(k: float) -> float:
    """Complete elliptic integral of the first kind K(k).

    Accepts 0 <= k <= 1 - 1e-12.  Negative moduli are rejected rather
    than folded so that sign mistakes upstream surface here.
    """
    _check_modulus(k, "ellip_k", K_MAX_MODULUS)
    return ellip_k_mc((1.0 - k) * (1.0 + k))


def ellip_e(k: float) -> float:
    """Complete elliptic integral of the second kind E(k), 0 <= k <= 1."""
    _check_modulus(k, "ellip_e", 1.0)
    return ellip_e_mc((1.0 - k) * (1.0 + k))


def ellip_pi(n: float, k: float) -> float:
    """Complete elliptic integral of the third kind Pi(n; k).

    The characteristic enters the integrand as 1/(1 - n z^2), so ``n < 1``
    is required; any negative n is allowed.
    """
    _check_modulus(k, "ellip_pi", K_MAX_MODULUS)
    return ellip_pi_mc(n, (1.0 - k) * (1.0 + k))


class ImaginaryModulus(NamedTuple):
    """Both sides of the imaginary-modulus identities for K and E.

    ``k_rhs`` and ``e_rhs`` should equal ``ellip_k(k)`` and ``ellip_e(k)``.
    """

    k_rhs: float
    e_rhs: float
    imaginary_modulus: float


def imaginary_modulus_transform(k: float) -> ImaginaryModulus:
    """Evaluate K(k) and E(k) through the purely imaginary modulus i*k/k'.

    With k' = sqrt(1 - k^2) the identities read

        K(k) = K(i k / k') / k',    E(k) = k' E(i k / k').

    The imaginary-modulus integrals are evaluated directly, through the
    negative parameter -k^2 / k'^2 (complementary parameter 1 / k'^2), so
    the two sides come from different Carlson arguments.
    """
    _check_modulus(k, "imaginary_modulus_transform", K_MAX_MODULUS)
    kc2 = (1.0 - k) * (1.0 + k)
    kc = math.sqrt(kc2)
    mc_imag = 1.0 / kc2
    return ImaginaryModulus(
        k_rhs=ellip_k_mc(mc_imag) / kc,
        e_rhs=kc * ellip_e_mc(mc_imag),
        imaginary_modulus=k / kc,
    )


def e_series_coefficient(m: int) -> Fraction:
    """Rational c with c*pi the coefficient of (k^2)^m in the series of E.

    c = (1/2) * [(2m)! / (2^(2m) (m!)^2)]^2 / (1 - 2m).
    """
    if m < 0:
        raise DomainError(f"series order must be nonnegative (got {m})")
    central = Fraction(math.comb(2 * m, m), 4**m)
    return Fraction(1, 2) * central * central / (1 - 2 * m)


def e_deriv_at_zero(m: int) -> float:
    """Coefficient of (k^2)^m in the Maclaurin series of E, as a float.

    This is (pi/2) [(2m)!/(2^(2m) (m!)^2)]^2 / (1 - 2m), i.e. the m-th
    derivative of E with respect to k^2 at zero *divided by m!*.  Use
    :func:`e_true_derivative_at_zero` for the derivative itself.

    Exact rational arithmetic is used up to order 20, log-gamma beyond.
    """
    if m < 0:
        raise DomainError(f"series order must be nonnegative (got {m})")
    if m > MAX_SERIES_ORDER:
        raise OverflowError(
            f"order {m} exceeds {MAX_SERIES_ORDER}; derivatives overflow double precision"
        )
    if m <= _EXACT_SERIES_ORDER:
        return math.pi * float(e_series_coefficient(m))
    log_central = math.lgamma(2 * m + 1) - 2 * m * math.log(2.0) - 2.0 * math.lgamma(m + 1)
    return 0.5 * math.pi * math.exp(2.0 * log_central) / (1 - 2 * m)


def e_true_derivative_at_zero(m: int) -> float:
    """d^m E / d(k^2)^m at k = 0."""
    return math.factorial(m) * e_deriv_at_zero(m)
