"""Shared fixtures and independent oracle helpers.

The oracles here deliberately avoid the package's kernel code paths:
matrices come from explicit numpy Kronecker products, fermionic references
from direct occupation-number enumeration, and gradients from central
finite differences.
"""

import numpy as np
import pytest

from vqemeta.hamiltonians import FermionIntegrals

PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_pauli(letters: str) -> np.ndarray:
    """Dense matrix of a Pauli string by brute-force Kronecker products.

    ``letters[q]`` acts on qubit q = bit q of the basis index, so qubit 0
    is the innermost (last) Kronecker factor.
    """
    m = np.array([[1]], dtype=complex)
    for letter in letters:  # kron(P_{n-1}, ..., P_0) built inside-out
        m = np.kron(PAULI_MATS[letter], m)
    return m


def kron_sum(terms) -> np.ndarray:
    """Dense matrix of [(coef, letters), ...] via the kron oracle."""
    dim = 2 ** len(terms[0][1])
    m = np.zeros((dim, dim), dtype=complex)
    for coef, letters in terms:
        m = m + coef * kron_pauli(letters)
    return m


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T


def finite_difference(f, theta: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function of a vector."""
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        up[i] += step
        dn = theta.copy()
        dn[i] -= step
        grad[i] = (f(up) - f(dn)) / (2 * step)
    return grad


def fock_matrix(ints: FermionIntegrals) -> np.ndarray:
    """Dense Fock-space Hamiltonian by direct occupation-number enumeration.

    Basis state m occupies orbital p iff bit p of m is set; fermionic signs
    come from counting occupied orbitals below the acted index. Completely
    independent of the Jordan-Wigner code path.
    """
    n = ints.n_spin_orbitals
    dim = 1 << n

    def annihilate(state, p):
        m, sign = state
        if m is None or not (m >> p) & 1:
            return None, 0
        sign *= (-1) ** bin(m & ((1 << p) - 1)).count("1")
        return m & ~(1 << p), sign

    def create(state, p):
        m, sign = state
        if m is None or (m >> p) & 1:
            return None, 0
        sign *= (-1) ** bin(m & ((1 << p) - 1)).count("1")
        return m | (1 << p), sign

    h = np.zeros((dim, dim), dtype=complex)
    nz = np.argwhere(ints.two_body != 0.0)
    for m in range(dim):
        h[m, m] += ints.core_energy
        for p in range(n):
            for q in range(n):
                if ints.one_body[p, q] == 0.0:
                    continue
                out = create(annihilate((m, 1), q), p)
                if out[0] is not None:
                    h[out[0], m] += ints.one_body[p, q] * out[1]
        for p, q, r, s in nz:
            out = (m, 1)
            out = annihilate(out, int(s))
            out = annihilate(out, int(r))
            out = create(out, int(q))
            out = create(out, int(p))
            if out[0] is not None:
                h[out[0], m] += 0.5 * ints.two_body[p, q, r, s] * out[1]
    return h


H2_FCIDUMP = """&FCI NORB=2,NELEC=2,MS2=0,
 ORBSYM=1,1,
 ISYM=1,
&END
0.6744887663568382 1 1 1 1
0.6634680964235081 1 1 2 2
0.1812875358123322 1 2 1 2
0.6973979494693358 2 2 2 2
-1.2524635735648981 1 1 0 0
-0.47594871522096355 2 2 0 0
0.7137539936876182 0 0 0 0
"""


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def h2_fcidump(tmp_path):
    path = tmp_path / "h2.fcidump"
    path.write_text(H2_FCIDUMP)
    return str(path)
