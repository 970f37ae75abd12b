"""Dense Hermitian eigendecomposition used as the package's reference oracle.

Backed by LAPACK via ``numpy.linalg.eigh`` (Householder tridiagonalization
plus implicit QL/divide-and-conquer), which shares no code with the
statevector kernels it is used to check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure, SizeLimitError, ValidationError
from .pauli import PauliSum, pauli_sum_matrix

DIM_CAP = 1 << 12
HERMITICITY_TOL = 1e-10


@dataclass
class Spectrum:
    """Ascending eigenvalues and (optionally) orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


def eigen_hermitian(m: np.ndarray, keep_vectors: bool = True) -> Spectrum:
    """Full spectrum of a Hermitian matrix of dimension <= 2^12."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > DIM_CAP:
        raise SizeLimitError(f"dimension {m.shape[0]} exceeds cap {DIM_CAP}")
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > HERMITICITY_TOL:
        raise ValidationError(f"matrix is not Hermitian: max |M - M^.| = {dev:.3e}")
    m = 0.5 * (m + m.conj().T)
    try:
        if keep_vectors:
            vals, vecs = np.linalg.eigh(m)
        else:
            vals = np.linalg.eigvalsh(m)
            vecs = None
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed to converge: {exc}")
    return Spectrum(vals, vecs)


def ground_energy(h: PauliSum) -> float:
    """Smallest eigenvalue of the dense realization of a Pauli sum (n <= 12)."""
    vals = eigen_hermitian(pauli_sum_matrix(h), keep_vectors=False).eigenvalues
    return float(vals[0])


def spectrum(h: PauliSum, keep_vectors: bool = False) -> Spectrum:
    """Full spectrum of a Pauli sum (n <= 12)."""
    return eigen_hermitian(pauli_sum_matrix(h), keep_vectors=keep_vectors)
