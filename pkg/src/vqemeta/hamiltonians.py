"""Problem Hamiltonians: truncated harmonic oscillator and chemistry inputs.

The oscillator is embedded in the level basis (basis state j = energy level
j), so its qubit operator is diagonal and decomposes into Z strings via one
Walsh-Hadamard transform. Chemistry Hamiltonians are ingested from FCIDUMP
integral files and mapped with Jordan-Wigner; Pauli-sum text files round
the loop for externally generated operators.

Pauli-sum text format (shared with the CLI): optional ``#`` comments, one
``qubits <n>`` header line, then one ``<coefficient> <letters>`` line per
term. ``letters[0]`` is qubit 0 (the least-significant basis-index bit).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ._fermion import add_scaled, product
from .errors import ParseError, ShapeMismatchError, ValidationError
from .pauli import PauliString, PauliSum, decompose_diagonal
from .statevector import SIMULATOR_CAP

SYMMETRY_TOL = 1e-8
DEFAULT_OMEGA = 0.5


@dataclass(frozen=True)
class ShoSpec:
    """Harmonic oscillator at angular frequency omega (hbar = 1), truncated
    to the lowest 2^n_qubits levels; level j has energy omega * (j + 1/2)."""

    omega: float = DEFAULT_OMEGA
    n_qubits: int = 4

    def __post_init__(self):
        if self.omega <= 0:
            raise ValidationError(f"omega must be positive, got {self.omega}")
        if not 1 <= self.n_qubits <= SIMULATOR_CAP:
            raise ValidationError(f"unsupported qubit count {self.n_qubits}")

    def level_energies(self) -> np.ndarray:
        levels = np.arange(1 << self.n_qubits, dtype=np.float64)
        return self.omega * (levels + 0.5)


def build_sho(spec: ShoSpec) -> PauliSum:
    """Z-string expansion of the truncated oscillator.

    The operator is diagonal in the level basis, so only the 2^n Z-strings
    can appear and the scan never forms a dense matrix; for the linear
    spectrum omega*(j + 1/2) exactly n + 1 terms survive.
    """
    return decompose_diagonal(spec.level_energies())


@dataclass
class FermionIntegrals:
    """Spin-orbital integral tables in operator order.

    ``one_body[p, q]`` multiplies a+_p a_q and ``two_body[p, q, r, s]``
    multiplies a+_p a+_q a_r a_s (the 1/2 prefactor is applied at mapping
    time, not stored). Spin orbitals are interleaved: spatial orbital k
    gives spin-up index 2k and spin-down index 2k+1.
    """

    n_spin_orbitals: int
    one_body: np.ndarray
    two_body: np.ndarray
    core_energy: float = 0.0
    n_electrons: int = 0

    def __post_init__(self):
        n = self.n_spin_orbitals
        if self.one_body.shape != (n, n):
            raise ShapeMismatchError(f"one_body shape {self.one_body.shape} for n={n}")
        if self.two_body.shape != (n, n, n, n):
            raise ShapeMismatchError(f"two_body shape {self.two_body.shape} for n={n}")

    def validate_symmetries(self, tol: float = 1e-10) -> None:
        dev1 = float(np.max(np.abs(self.one_body - self.one_body.T))) if self.one_body.size else 0.0
        if dev1 > tol:
            raise ValidationError(f"one-body table not symmetric: {dev1:.3e}")
        # Hermiticity of the assembled operator needs h_pqrs = h_srqp.
        dev2 = float(np.max(np.abs(self.two_body - self.two_body.transpose(3, 2, 1, 0)))) if self.two_body.size else 0.0
        if dev2 > tol:
            raise ValidationError(f"two-body table breaks Hermiticity: {dev2:.3e}")


def _expand_spatial(
    norb: int, h1: np.ndarray, eri_chem: np.ndarray, core: float, nelec: int
) -> FermionIntegrals:
    """Spatial chemist integrals -> interleaved spin-orbital operator tables."""
    n = 2 * norb
    one = np.zeros((n, n))
    for sigma in (0, 1):
        one[sigma::2, sigma::2] = h1
    two = np.zeros((n, n, n, n))
    # h_{pqrs} multiplying a+_p a+_q a_r a_s equals (P S | Q R) in chemist
    # notation with matching spins (sigma_p = sigma_s, sigma_q = sigma_r).
    for sp in (0, 1):
        for sq in (0, 1):
            two[sp::2, sq::2, sq::2, sp::2] = eri_chem.transpose(0, 2, 3, 1)
    return FermionIntegrals(n, one, two, core, nelec)


_HEADER_RE = re.compile(r"&FCI", re.IGNORECASE)
_KV_RE = re.compile(r"(NORB|NELEC)\s*=\s*(\d+)", re.IGNORECASE)


def load_fcidump(path, two_body_ordering: str = "chemist") -> FermionIntegrals:
    """Read an FCIDUMP-style integral file.

    Header: ``&FCI NORB=...,NELEC=...`` (other keys ignored) terminated by
    ``&END`` or ``/``. Data lines are ``value p q r s`` with 1-based spatial
    orbital indices: ``p q 0 0`` is one-body, ``0 0 0 0`` the core energy,
    anything else a two-body integral in the chosen ordering ('chemist'
    (pq|rs) by default, or 'physicist' <pq|rs>). Stored unique values are
    propagated through the 8-fold symmetry; conflicting duplicates beyond
    1e-8 are rejected.
    """
    if two_body_ordering not in ("chemist", "physicist"):
        raise ValidationError(f"unknown two-body ordering {two_body_ordering!r}")
    norb = nelec = None
    core = 0.0
    h1 = None
    eri = None
    seen1: set[tuple] = set()
    seen2: set[tuple] = set()
    in_header = True
    with open(path) as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if in_header:
                if _HEADER_RE.search(line):
                    pass
                for key, val in _KV_RE.findall(line):
                    if key.upper() == "NORB":
                        norb = int(val)
                    else:
                        nelec = int(val)
                if "&END" in line.upper() or line == "/" or line.endswith("/"):
                    if norb is None:
                        raise ParseError("header ended without NORB", no)
                    in_header = False
                    h1 = np.zeros((norb, norb))
                    eri = np.zeros((norb, norb, norb, norb))
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ParseError(f"expected 'value p q r s', got {line!r}", no)
            try:
                val = float(parts[0])
                p, q, r, s = (int(t) for t in parts[1:])
            except ValueError as exc:
                raise ParseError(str(exc), no)
            if min(p, q, r, s) < 0 or max(p, q, r, s) > norb:
                raise ParseError(f"orbital index out of range in {line!r}", no)
            if p == q == r == s == 0:
                core = val
            elif r == 0 and s == 0:
                if p == 0 or q == 0:
                    raise ParseError(f"bad one-body indices in {line!r}", no)
                i, j = p - 1, q - 1
                key = (min(i, j), max(i, j))
                if key in seen1 and abs(h1[i, j] - val) > SYMMETRY_TOL:
                    raise ValidationError(
                        f"line {no}: one-body value conflicts with earlier entry "
                        f"({h1[i, j]!r} vs {val!r})"
                    )
                seen1.add(key)
                h1[i, j] = h1[j, i] = val
            else:
                if min(p, q, r, s) == 0:
                    raise ParseError(f"bad two-body indices in {line!r}", no)
                i, j, k, l = p - 1, q - 1, r - 1, s - 1
                if two_body_ordering == "physicist":
                    # <pq|rs> = (pr|qs)
                    i, j, k, l = i, k, j, l
                images = {
                    (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                    (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
                }
                key = min(images)
                if key in seen2 and abs(eri[i, j, k, l] - val) > SYMMETRY_TOL:
                    raise ValidationError(
                        f"line {no}: two-body value conflicts with earlier entry "
                        f"({eri[i, j, k, l]!r} vs {val!r})"
                    )
                seen2.add(key)
                for im in images:
                    eri[im] = val
    if in_header:
        raise ParseError("no FCIDUMP header found", 1)
    return _expand_spatial(norb, h1, eri, core, nelec or 0)


def jordan_wigner(f: FermionIntegrals, drop_tol: float = 1e-12) -> PauliSum:
    """Map integral tables to a qubit operator.

    a+_p = (X_p - i Y_p)/2 times a Z string on qubits below p; assembles
    sum h_pq a+_p a_q + 1/2 sum h_pqrs a+_p a+_q a_r a_s + core * I, merges
    strings, and strips imaginary residue (must be <= 1e-10).
    """
    f.validate_symmetries()
    n = f.n_spin_orbitals
    acc: dict[tuple[int, int], complex] = {(0, 0): complex(f.core_energy)}
    for p in range(n):
        for q in range(n):
            h = f.one_body[p, q]
            if h != 0.0:
                add_scaled(acc, product([(p, True), (q, False)]), h)
    nz = np.argwhere(f.two_body != 0.0)
    for p, q, r, s in nz:
        add_scaled(
            acc,
            product([(int(p), True), (int(q), True), (int(r), False), (int(s), False)]),
            0.5 * f.two_body[p, q, r, s],
        )
    terms = [
        (coef, PauliString(n, x, z)) for (x, z), coef in acc.items()
    ]
    return PauliSum.from_terms(n, terms, drop_tol=drop_tol, imag_tol=1e-10)


def save_pauli_sum(h: PauliSum, path) -> None:
    """Write the text format; coefficients at 17 significant digits."""
    with open(path, "w") as fh:
        fh.write(f"qubits {h.n_qubits}\n")
        for coef, ps in h.terms:
            fh.write(f"{coef:.17g} {ps.letters}\n")


def load_pauli_sum(path) -> PauliSum:
    """Read the text format back into a canonical PauliSum."""
    n_qubits = None
    terms = []
    with open(path) as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "qubits":
                if len(parts) != 2:
                    raise ParseError(f"malformed header {raw!r}", no)
                try:
                    n_qubits = int(parts[1])
                except ValueError:
                    raise ParseError(f"bad qubit count {parts[1]!r}", no)
                if n_qubits < 1:
                    raise ParseError(f"qubit count must be positive, got {n_qubits}", no)
                continue
            if n_qubits is None:
                raise ParseError("term line before 'qubits <n>' header", no)
            if len(parts) != 2:
                raise ParseError(f"expected '<coefficient> <letters>', got {raw!r}", no)
            try:
                coef = float(parts[0])
            except ValueError:
                raise ParseError(f"bad coefficient {parts[0]!r}", no)
            letters = parts[1].upper()
            if len(letters) != n_qubits:
                raise ValidationError(
                    f"line {no}: letter string {letters!r} has length "
                    f"{len(letters)}, expected {n_qubits}"
                )
            try:
                ps = PauliString.from_letters(letters)
            except ValidationError as exc:
                raise ParseError(str(exc), no)
            terms.append((coef, ps))
    if n_qubits is None:
        raise ParseError("missing 'qubits <n>' header", 1)
    return PauliSum.from_terms(n_qubits, terms)
