"""Free-fermion spectra of finite XY chains.

After the Jordan-Wigner transformation the chain is a quadratic fermion
form ``c^dag A c + (c^dag B c^dag + h.c.)/2`` with A symmetric (field on the
diagonal, hopping -1/2) and B antisymmetric (pairing -gamma/2).  The
one-particle energies are the square roots of the eigenvalues of
(A - B)(A + B).  Because (A - B) = (A + B)^T they are exactly the singular
values of A + B, which is how the open chain is solved: small energies
(edge modes) come out with absolute accuracy ~eps instead of ~sqrt(eps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import linalg, optimize

from xychain.errors import DomainError

__all__ = [
    "MAX_OPEN_SITES",
    "Boundary",
    "ChainSpec",
    "SpectrumResult",
    "cyclic_lambdas",
    "open_chain_spectrum",
    "coupling_matrices",
    "spectrum",
    "gap",
    "gap_thermo_limit",
    "gap_thermo_limit_numeric",
    "many_body_levels",
]

MAX_OPEN_SITES = 4000

Boundary = Literal["open", "c-cyclic"]


@dataclass(frozen=True)
class ChainSpec:
    n_sites: int
    boundary: Boundary = "open"

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise DomainError(f"chain length must be an integer >= 2 (got {self.n_sites})")
        if self.boundary not in ("open", "c-cyclic"):
            raise DomainError(f"unknown boundary {self.boundary!r}")


@dataclass(frozen=True)
class SpectrumResult:
    """One-particle energies of a finite chain with derived quantities.

    ``gap`` follows the 1/N convention: the smallest one-particle energy
    divided by the chain length.  ``scaled_gap`` is N * gap.
    """

    lambdas: np.ndarray
    ground_energy: float
    gap: float

    @classmethod
    def from_lambdas(cls, lambdas) -> "SpectrumResult":
        lam = np.sort(np.asarray(lambdas, dtype=float))
        return cls(lambdas=lam, ground_energy=-0.5 * float(lam.sum()), gap=float(lam[0]) / len(lam))

    @property
    def n_sites(self) -> int:
        return len(self.lambdas)

    @property
    def scaled_gap(self) -> float:
        return float(self.lambdas[0])


def cyclic_lambdas(alpha: float, gamma: float, n_sites: int) -> SpectrumResult:
    """Closed-form energies of the c-cyclic chain at k = 2 pi m / N."""
    ChainSpec(n_sites, "c-cyclic")
    k = 2.0 * np.pi * np.arange(n_sites) / n_sites
    # alpha - cos k written to stay accurate near k = 0
    detuning = (alpha - 1.0) + 2.0 * np.sin(0.5 * k) ** 2
    return SpectrumResult.from_lambdas(np.hypot(detuning, gamma * np.sin(k)))


def coupling_matrices(alpha: float, gamma: float, n_sites: int) -> tuple[np.ndarray, np.ndarray]:
    """Hopping matrix A and pairing matrix B of the open chain."""
    n = n_sites
    a = np.zeros((n, n))
    b = np.zeros((n, n))
    idx = np.arange(n - 1)
    a[np.arange(n), np.arange(n)] = alpha
    a[idx, idx + 1] = a[idx + 1, idx] = -0.5
    b[idx, idx + 1] = -0.5 * gamma
    b[idx + 1, idx] = 0.5 * gamma
    return a, b


def open_chain_spectrum(alpha: float, gamma: float, n_sites: int) -> SpectrumResult:
    """One-particle energies of the open chain by dense SVD of A + B."""
    ChainSpec(n_sites, "open")
    if n_sites > MAX_OPEN_SITES:
        raise DomainError(f"open chain limited to {MAX_OPEN_SITES} sites (got {n_sites})")
    a, b = coupling_matrices(alpha, gamma, n_sites)
    plus = a + b
    # (A - B) must be the transpose of (A + B) for the SVD shortcut to hold
    if not np.array_equal(a - b, plus.T):
        raise ArithmeticError("coupling matrices lost their symmetry")
    try:
        lam = linalg.svdvals(plus, check_finite=True)
    except linalg.LinAlgError as exc:
        raise ArithmeticError(f"SVD failed for N = {n_sites}: {exc}") from exc
    return SpectrumResult.from_lambdas(lam)


def spectrum(alpha: float, gamma: float, chain: ChainSpec) -> SpectrumResult:
    if chain.boundary == "open":
        return open_chain_spectrum(alpha, gamma, chain.n_sites)
    return cyclic_lambdas(alpha, gamma, chain.n_sites)


def gap(alpha: float, gamma: float, chain: ChainSpec) -> float:
    """Delta_N = min_k Lambda_k / N."""
    return spectrum(alpha, gamma, chain).gap


def many_body_levels(result: SpectrumResult) -> np.ndarray:
    """All 2^N levels E_g + sum over subsets of the one-particle energies, sorted."""
    if result.n_sites > 24:
        raise DomainError("refusing to enumerate more than 2^24 levels")
    levels = np.array([result.ground_energy])
    for lam in result.lambdas:
        levels = np.concatenate([levels, levels + lam])
    return np.sort(levels)


def gap_thermo_limit(alpha: float, gamma: float, verify: bool = True) -> float:
    """lim N * Delta_N for the c-cyclic chain.

    Lambda(k)^2 is a quadratic in c = cos k with minimum at
    c* = alpha / (1 - gamma^2).  When c* <= 1, i.e. alpha <= 1 - gamma^2, the
    minimum is interior and equals gamma sqrt((1 - alpha^2 - gamma^2)/(1 - gamma^2));
    otherwise it sits at k = 0 and equals |alpha - 1|.

    With ``verify`` the result is checked against direct minimization over k.
    """
    a, g = abs(float(alpha)), abs(float(gamma))
    if g > 1.0:
        raise DomainError(f"anisotropy must lie in [-1, 1] (got {gamma})")
    one_m_g2 = (1.0 - g) * (1.0 + g)
    if one_m_g2 > 0 and a <= one_m_g2:
        value = g * math.sqrt(max(0.0, (one_m_g2 - a * a) / one_m_g2))
    else:
        value = abs(a - 1.0)
    if verify:
        direct = gap_thermo_limit_numeric(a, g)
        if abs(direct - value) > 1e-9 * max(1.0, value):
            raise ArithmeticError(
                f"gap limit formula {value!r} disagrees with direct minimization {direct!r}"
            )
    return value


def gap_thermo_limit_numeric(alpha: float, gamma: float, grid: int = 100_000) -> float:
    """min over k of Lambda(k): uniform grid, then bounded Brent (golden-section) refinement."""
    k = np.linspace(0.0, np.pi, grid + 1)

    def lam(t):
        return np.hypot((alpha - 1.0) + 2.0 * np.sin(0.5 * t) ** 2, gamma * np.sin(t))

    values = lam(k)
    i = int(np.argmin(values))
    lo = k[max(i - 1, 0)]
    hi = k[min(i + 1, grid)]
    best = float(values[i])
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda t: float(lam(t)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-14},
        )
        best = min(best, float(res.fun), float(lam(lo)), float(lam(hi)))
    return best
