from functools import reduce

import numpy as np
import pytest

from xychain import exactspin, spectrum
from xychain.errors import DomainError

SX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
SY = 0.5 * np.array([[0, -1j], [1j, 0]])
SZ = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)


def site_op(op, i, n):
    return reduce(np.kron, [op if j == i else np.eye(2) for j in range(n)])


def kron_hamiltonian(alpha, gamma, n):
    """Textbook Kronecker-product construction, independent of the bit tricks."""
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(n - 1):
        h -= (1 + gamma) * site_op(SX, i, n) @ site_op(SX, i + 1, n)
        h -= (1 - gamma) * site_op(SY, i, n) @ site_op(SY, i + 1, n)
    for i in range(n):
        h -= alpha * site_op(SZ, i, n)
    return h


@pytest.mark.parametrize("alpha,gamma,n", [(0.3, 0.6, 3), (1.2, -0.4, 4), (0.0, 1.0, 5), (0.7, 0.0, 6)])
def test_spectrum_matches_kronecker_oracle(alpha, gamma, n):
    ref = np.linalg.eigvalsh(kron_hamiltonian(alpha, gamma, n))
    got = exactspin.full_spectrum(exactspin.build(alpha, gamma, n))
    assert np.allclose(got, ref, atol=1e-12)


def test_matrix_symmetric():
    m = exactspin.build(0.4, 0.7, 6).matrix
    assert np.array_equal(m, m.T)


def test_two_site_ising():
    assert np.allclose(exactspin.full_spectrum(exactspin.build(0.0, 1.0, 2)), [-0.5, -0.5, 0.5, 0.5])


def test_two_site_xx():
    assert np.allclose(exactspin.full_spectrum(exactspin.build(0.0, 0.0, 2)), [-0.5, 0.0, 0.0, 0.5])


def test_field_term_is_magnetization_ladder():
    # the bond terms are off-diagonal, so the diagonal is -alpha * total Sz
    n, a = 5, 0.8
    diag = np.diag(exactspin.build(a, 0.3, n).matrix)
    sz = np.array([bin(s).count("1") - n / 2 for s in range(2**n)])
    assert np.allclose(diag, -a * sz)


def test_trace_vanishes():
    for n in (4, 7):
        ev = exactspin.full_spectrum(exactspin.build(0.5, 0.5, n))
        assert abs(ev.sum()) < 1e-9 * 2**n


def test_free_fermion_reconstruction_n8():
    a, g, n = 0.5, 0.5, 8
    ev = exactspin.full_spectrum(exactspin.build(a, g, n))
    ff = spectrum.open_chain_spectrum(a, g, n)
    assert abs(ev[0] - ff.ground_energy) < 1e-9
    assert abs((ev[1] - ev[0]) - n * ff.gap) < 1e-9
    assert np.allclose(ev, spectrum.many_body_levels(ff), atol=1e-9)


def test_anisotropy_sign_symmetry():
    for a, g in [(0.3, 0.6), (1.1, 0.25)]:
        plus = exactspin.full_spectrum(exactspin.build(a, g, 7))
        minus = exactspin.full_spectrum(exactspin.build(a, -g, 7))
        assert np.allclose(plus, minus, atol=1e-10)


def test_ground_state_degeneracy_pattern():
    strong = exactspin.full_spectrum(exactspin.build(1.5, 0.5, 10))
    assert strong[1] - strong[0] > 0.1
    ordered = exactspin.full_spectrum(exactspin.build(0.2, 0.8, 12))
    assert ordered[1] - ordered[0] < 1e-3


def test_build_validation():
    with pytest.raises(DomainError):
        exactspin.build(0.5, 0.5, 1)
    with pytest.raises(DomainError):
        exactspin.build(0.5, 0.5, exactspin.MAX_SITES + 1)
    with pytest.raises(DomainError):
        exactspin.build(0.5, 0.5, 4, boundary="c-cyclic")


def test_parity_blocks_decouple():
    h = exactspin.build(0.6, 0.4, 6)
    even, odd = exactspin.parity_blocks(h)
    assert even.shape == odd.shape == (32, 32)
    ref = np.linalg.eigvalsh(h.matrix)
    assert np.allclose(np.sort(np.concatenate([np.linalg.eigvalsh(even), np.linalg.eigvalsh(odd)])), ref, atol=1e-12)
