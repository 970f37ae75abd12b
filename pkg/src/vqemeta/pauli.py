"""Pauli strings, weighted Pauli sums, and Hermitian-matrix decomposition.

Conventions used package-wide:

* qubit 0 is the least-significant bit of the computational-basis index;
* a string's ``letters`` are indexed by qubit, so ``letters[0]`` is qubit 0
  (files and reprs print qubit 0 leftmost);
* Pauli sums carry real coefficients and are kept in canonical merged form
  (no duplicate strings, fixed sort order), so equal operators compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import ShapeMismatchError, SizeLimitError, ValidationError

DENSE_MATRIX_CAP = 12

_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_I_POW = np.array([1, 1j, -1, -1j], dtype=np.complex128)


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, encoded as two bitmasks.

    Bit q of ``x_mask`` marks an X component on qubit q, bit q of ``z_mask``
    a Z component; both bits set mean Y, neither means identity.
    """

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValidationError(f"n_qubits must be positive, got {self.n_qubits}")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValidationError("mask has bits outside the qubit range")

    @classmethod
    def from_letters(cls, letters: str | Sequence[str]) -> PauliString:
        xm = zm = 0
        for q, letter in enumerate(letters):
            try:
                x, z = _LETTER_TO_BITS[letter]
            except KeyError:
                raise ValidationError(f"invalid Pauli letter {letter!r}")
            xm |= x << q
            zm |= z << q
        return cls(len(letters), xm, zm)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits, 0, 0)

    @property
    def letters(self) -> str:
        out = []
        for q in range(self.n_qubits):
            x = (self.x_mask >> q) & 1
            z = (self.z_mask >> q) & 1
            out.append("IXZY"[x + 2 * z])
        return "".join(out)

    @property
    def weight(self) -> int:
        """Number of non-identity factors."""
        return bin(self.x_mask | self.z_mask).count("1")

    def __str__(self):
        return self.letters


def _phases(n_qubits: int, x_mask: int, z_mask: int) -> np.ndarray:
    """phi[k] such that P|k> = phi[k] |k ^ x_mask> for all basis indices k."""
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    ny = bin(x_mask & z_mask).count("1")
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & np.int64(z_mask)) & 1)
    return _I_POW[ny & 3] * signs


def pauli_matrix(p: PauliString, cap: int = DENSE_MATRIX_CAP) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a Pauli string.

    Equals the Kronecker product of the single-qubit factors with qubit 0 on
    the least-significant axis, i.e. kron(P_{n-1}, ..., P_1, P_0).
    """
    if p.n_qubits > cap:
        raise SizeLimitError(f"{p.n_qubits} qubits exceeds dense-matrix cap {cap}")
    dim = 1 << p.n_qubits
    m = np.zeros((dim, dim), dtype=np.complex128)
    k = np.arange(dim, dtype=np.int64)
    m[k ^ np.int64(p.x_mask), k] = _phases(p.n_qubits, p.x_mask, p.z_mask)
    return m


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings on a fixed qubit count.

    ``terms`` is canonical: duplicate strings merged, sorted by bitmask key.
    Real coefficients keep the represented operator Hermitian.
    """

    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...] = field(default_factory=tuple)

    def __post_init__(self):
        for _, ps in self.terms:
            if ps.n_qubits != self.n_qubits:
                raise ShapeMismatchError(
                    f"term on {ps.n_qubits} qubits inside a {self.n_qubits}-qubit sum"
                )

    @classmethod
    def from_terms(
        cls,
        n_qubits: int,
        terms: Iterable[tuple[complex, PauliString]],
        drop_tol: float = 0.0,
        imag_tol: float = 1e-12,
    ) -> PauliSum:
        """Merge duplicates and canonicalize.

        Complex coefficients are allowed in transit (JW products, trace
        scans); the merged result must be real within ``imag_tol``.
        """
        acc: dict[tuple[int, int], complex] = {}
        for coef, ps in terms:
            if ps.n_qubits != n_qubits:
                raise ShapeMismatchError(
                    f"term on {ps.n_qubits} qubits inside a {n_qubits}-qubit sum"
                )
            key = (ps.x_mask, ps.z_mask)
            acc[key] = acc.get(key, 0.0) + coef
        out = []
        for (xm, zm), coef in sorted(acc.items()):
            coef = complex(coef)
            if abs(coef.imag) > imag_tol:
                raise ValidationError(
                    f"non-real coefficient {coef} on {PauliString(n_qubits, xm, zm)}"
                )
            if abs(coef.real) > drop_tol or (drop_tol == 0.0 and coef.real != 0.0):
                out.append((float(coef.real), PauliString(n_qubits, xm, zm)))
        return cls(n_qubits, tuple(out))

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def coefficient(self, ps: PauliString) -> float:
        for coef, term in self.terms:
            if term.x_mask == ps.x_mask and term.z_mask == ps.z_mask:
                return coef
        return 0.0

    def masks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(x_masks, z_masks, coefficients) as arrays for the kernels."""
        cached = getattr(self, "_mask_cache", None)
        if cached is None:
            cached = (
                np.array([ps.x_mask for _, ps in self.terms], dtype=np.int64),
                np.array([ps.z_mask for _, ps in self.terms], dtype=np.int64),
                np.array([c for c, _ in self.terms], dtype=np.float64),
            )
            object.__setattr__(self, "_mask_cache", cached)
        return cached

    def __add__(self, other: PauliSum) -> PauliSum:
        if other.n_qubits != self.n_qubits:
            raise ShapeMismatchError("cannot add sums on different qubit counts")
        return PauliSum.from_terms(self.n_qubits, list(self.terms) + list(other.terms))

    def __rmul__(self, scalar: float) -> PauliSum:
        return PauliSum(
            self.n_qubits, tuple((scalar * c, ps) for c, ps in self.terms)
        )

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c:+.12g} {ps}" for c, ps in self.terms)


def pauli_sum_matrix(h: PauliSum, cap: int = DENSE_MATRIX_CAP) -> np.ndarray:
    """Dense Hermitian matrix sum_j w_j P_j."""
    if h.n_qubits > cap:
        raise SizeLimitError(f"{h.n_qubits} qubits exceeds dense-matrix cap {cap}")
    dim = 1 << h.n_qubits
    m = np.zeros((dim, dim), dtype=np.complex128)
    k = np.arange(dim, dtype=np.int64)
    for coef, ps in h.terms:
        m[k ^ np.int64(ps.x_mask), k] += coef * _phases(h.n_qubits, ps.x_mask, ps.z_mask)
    return m


def decompose_hermitian(
    m: np.ndarray,
    drop_tol: float = 1e-12,
    cap: int = DENSE_MATRIX_CAP,
    hermiticity_tol: float = 1e-10,
) -> PauliSum:
    """Expand a Hermitian matrix as sum_k alpha_k P_k with alpha_k = Tr(P_k M)/2^n.

    Scans 4^n strings grouped by X-mask; each group's 2^n traces are one
    Walsh-Hadamard transform, so the full scan is O(n 4^n). Exactly diagonal
    input short-circuits to the single X-mask-0 group (Z strings only).
    Coefficients below ``drop_tol`` are omitted.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeMismatchError(f"expected a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    n = dim.bit_length() - 1
    if dim != (1 << n) or dim < 2:
        raise ShapeMismatchError(f"matrix dimension {dim} is not a power of two >= 2")
    if n > cap:
        raise SizeLimitError(f"{n} qubits exceeds dense-matrix cap {cap}")
    dev = np.max(np.abs(m - m.conj().T))
    if dev > hermiticity_tol:
        raise ValidationError(f"matrix is not Hermitian: max |M - M^.| = {dev:.3e}")
    m = 0.5 * (m + m.conj().T)
    m = np.ascontiguousarray(m, dtype=np.complex128)

    diagonal_only = not np.any(m[~np.eye(dim, dtype=bool)])
    kern = kernels.get()
    terms: list[tuple[complex, PauliString]] = []
    xms = [0] if diagonal_only else range(dim)
    for xm in xms:
        coefs = kern.decompose_xm_block(m, xm)
        for zm in np.nonzero(np.abs(coefs) > drop_tol)[0]:
            terms.append((complex(coefs[zm]), PauliString(n, int(xm), int(zm))))
    return PauliSum.from_terms(n, terms, drop_tol=drop_tol)


def decompose_diagonal(diag: np.ndarray, drop_tol: float = 1e-12) -> PauliSum:
    """Z-string expansion of a diagonal operator given only its diagonal.

    Avoids materializing the dense matrix, so it works beyond the dense cap;
    the coefficients are the Walsh-Hadamard transform of the diagonal / 2^n.
    """
    diag = np.asarray(diag, dtype=np.float64)
    dim = diag.shape[0]
    n = dim.bit_length() - 1
    if dim != (1 << n) or dim < 2:
        raise ShapeMismatchError(f"diagonal length {dim} is not a power of two >= 2")
    v = diag.astype(np.complex128)
    kernels.get().wht_inplace(v)
    v /= dim
    terms = [
        (complex(v[zm]), PauliString(n, 0, int(zm)))
        for zm in np.nonzero(np.abs(v) > drop_tol)[0]
    ]
    return PauliSum.from_terms(n, terms, drop_tol=drop_tol)


def apply_pauli(p: PauliString, s):
    """P|psi> for a statevector; norm is preserved (Paulis are unitary)."""
    from .statevector import StateVector

    if p.n_qubits != s.n_qubits:
        raise ShapeMismatchError(
            f"Pauli on {p.n_qubits} qubits applied to {s.n_qubits}-qubit state"
        )
    dst = np.empty_like(s.amps)
    kernels.get().apply_pauli_string(s.amps, dst, p.x_mask, p.z_mask)
    return StateVector(p.n_qubits, dst)
