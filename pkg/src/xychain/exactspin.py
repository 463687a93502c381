"""Brute-force diagonalization of the spin-1/2 XY chain.

H = -sum_<ij> [(1 + gamma) Sx_i Sx_j + (1 - gamma) Sy_i Sy_j] - alpha sum_i Sz_i

on an open chain, built as a dense real matrix in the Sz basis.  Basis
state s has spin i up when bit i of s is set.  This is exponentially
expensive and exists only to check the free-fermion route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from xychain.errors import DomainError

__all__ = ["MAX_SITES", "SpinHamiltonian", "build", "full_spectrum", "parity_blocks"]

MAX_SITES = 14


@dataclass(frozen=True)
class SpinHamiltonian:
    n_sites: int
    matrix: np.ndarray


def build(alpha: float, gamma: float, n_sites: int, boundary: str = "open") -> SpinHamiltonian:
    """Dense Hamiltonian of an open chain of ``n_sites`` spins.

    Bond terms in raising/lowering form: an antiparallel pair is flipped with
    amplitude -1/2, a parallel pair with amplitude -gamma/2.
    """
    if boundary != "open":
        raise DomainError("only open chains are supported by the spin-space oracle")
    if not 2 <= n_sites <= MAX_SITES:
        raise DomainError(f"n_sites must be in [2, {MAX_SITES}] (got {n_sites})")
    dim = 1 << n_sites
    states = np.arange(dim)
    bits = (states[:, None] >> np.arange(n_sites)) & 1
    h = np.zeros((dim, dim))
    h[states, states] = -alpha * (bits.sum(axis=1) - 0.5 * n_sites)
    for i in range(n_sites - 1):
        parallel = bits[:, i] == bits[:, i + 1]
        flipped = states ^ (0b11 << i)
        h[flipped, states] = np.where(parallel, -0.5 * gamma, -0.5)
    return SpinHamiltonian(n_sites=n_sites, matrix=h)


def parity_blocks(h: SpinHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """Even and odd sectors of the number of up spins.

    Every bond term flips two spins, so H never mixes the sectors.
    """
    states = np.arange(h.matrix.shape[0])
    odd = np.array([bin(s).count("1") & 1 for s in states], dtype=bool)
    return h.matrix[np.ix_(~odd, ~odd)], h.matrix[np.ix_(odd, odd)]


def full_spectrum(h: SpinHamiltonian) -> np.ndarray:
    """All 2^N eigenvalues, ascending (the two parity sectors are solved separately)."""
    try:
        levels = [linalg.eigvalsh(block, check_finite=False) for block in parity_blocks(h)]
    except linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigensolver failed for N = {h.n_sites}: {exc}") from exc
    return np.sort(np.concatenate(levels))
