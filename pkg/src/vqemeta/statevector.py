"""Dense statevector simulation: gates, expectation values, overlaps.

Hot loops live in the kernel backends; this module owns validation, the
public functional API, and the deterministic term-block parallelization of
Pauli-sum expectations. Results are bitwise reproducible across thread
counts because work is split into fixed-size blocks merged in index order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NumericalFailure, ShapeMismatchError, SizeLimitError, ValidationError
from .pauli import PauliString, PauliSum
from .parallel import parallel_map, resolve_threads

SIMULATOR_CAP = 24
NORM_TOL = 1e-10

# Terms per expectation work unit; fixed so the reduction order (and thus
# the result, bit for bit) is independent of the thread count.
_TERM_BLOCK = 16


@dataclass
class StateVector:
    """Complex amplitudes over the computational basis of ``n_qubits``."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if self.amps.shape != (1 << self.n_qubits,):
            raise ShapeMismatchError(
                f"amplitude array of shape {self.amps.shape} for {self.n_qubits} qubits"
            )
        if self.amps.dtype != np.complex128:
            self.amps = self.amps.astype(np.complex128)

    def norm_sq(self) -> float:
        return kernels.get().norm_sq(self.amps)

    def copy(self) -> StateVector:
        return StateVector(self.n_qubits, self.amps.copy())

    def dump_csv(self, path) -> None:
        """Debug dump: one `index,re,im` row per amplitude."""
        with open(path, "w") as fh:
            fh.write("index,re,im\n")
            for i, a in enumerate(self.amps):
                fh.write(f"{i},{a.real:.17g},{a.imag:.17g}\n")


def _check_normalized(s: StateVector, what: str = "state"):
    nsq = s.norm_sq()
    if abs(nsq - 1.0) > NORM_TOL:
        raise ValidationError(f"{what} is not normalized: |psi|^2 = {nsq!r}")


def zero_state(n_qubits: int, cap: int = SIMULATOR_CAP) -> StateVector:
    """|0...0>."""
    if n_qubits < 1:
        raise ValidationError(f"n_qubits must be >= 1, got {n_qubits}")
    if n_qubits > cap:
        raise SizeLimitError(f"{n_qubits} qubits exceeds simulator cap {cap}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def random_state(n_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-ish random normalized state (testing and probing helper)."""
    amps = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    return StateVector(n_qubits, amps.astype(np.complex128))


def _single_gate(s: StateVector, op: int, q0: int = 0, q1: int = 0,
                 xm: int = 0, zm: int = 0, angle: float = 0.0) -> StateVector:
    _check_normalized(s)
    out = s.amps.copy()
    kernels.get().exec_program(
        np.array([op], dtype=np.int64),
        np.array([q0], dtype=np.int64),
        np.array([q1], dtype=np.int64),
        np.array([-1], dtype=np.int64),
        np.array([angle], dtype=np.float64),
        np.array([xm], dtype=np.int64),
        np.array([zm], dtype=np.int64),
        np.zeros(1, dtype=np.float64),
        -1,
        0.0,
        out,
    )
    return StateVector(s.n_qubits, out)


def _check_qubit(s: StateVector, qubit: int):
    if not 0 <= qubit < s.n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {s.n_qubits} qubits")


def apply_ry(s: StateVector, qubit: int, theta: float) -> StateVector:
    """exp(-i theta Y/2) on the target qubit."""
    _check_qubit(s, qubit)
    return _single_gate(s, kernels.OP_RY, q0=qubit, angle=theta)


def apply_rz(s: StateVector, qubit: int, theta: float) -> StateVector:
    """exp(-i theta Z/2) on the target qubit."""
    _check_qubit(s, qubit)
    return _single_gate(s, kernels.OP_RZ, q0=qubit, angle=theta)


def apply_x(s: StateVector, qubit: int) -> StateVector:
    _check_qubit(s, qubit)
    return _single_gate(s, kernels.OP_X, q0=qubit)


def apply_cnot(s: StateVector, control: int, target: int) -> StateVector:
    """Flip ``target`` where ``control`` is 1."""
    _check_qubit(s, control)
    _check_qubit(s, target)
    if control == target:
        raise ValueError(f"control and target coincide (qubit {control})")
    return _single_gate(s, kernels.OP_CNOT, q0=control, q1=target)


def apply_pauli_rotation(s: StateVector, p: PauliString, theta: float) -> StateVector:
    """exp(-i theta P/2)|psi> = cos(theta/2)|psi> - i sin(theta/2) P|psi>."""
    if p.n_qubits != s.n_qubits:
        raise ShapeMismatchError(
            f"rotation on {p.n_qubits} qubits applied to {s.n_qubits}-qubit state"
        )
    return _single_gate(s, kernels.OP_PROT, xm=p.x_mask, zm=p.z_mask, angle=theta)


def expectation_raw(h: PauliSum, amps: np.ndarray, threads: int = 1) -> float:
    """sum_j w_j <psi|P_j|psi> on a raw amplitude array (no validation).

    Inner loops accumulate in fixed chunks; terms are grouped into
    fixed-size blocks evaluated (possibly concurrently) and merged in block
    order, so the value is identical for any thread count.
    """
    if h.n_terms == 0:
        return 0.0
    kern = kernels.get()
    xs, zs, cs = h.masks()
    if threads <= 1 or h.n_terms <= _TERM_BLOCK:
        total, max_im = kern.expectation_terms(amps, xs, zs, cs)
    else:
        starts = range(0, h.n_terms, _TERM_BLOCK)
        parts = parallel_map(
            lambda s: kern.expectation_terms(
                amps, xs[s : s + _TERM_BLOCK], zs[s : s + _TERM_BLOCK], cs[s : s + _TERM_BLOCK]
            ),
            starts,
            threads,
        )
        total = 0.0
        max_im = 0.0
        for re, im in parts:
            total += re
            max_im = max(max_im, im)
    if max_im > 1e-10:
        raise NumericalFailure(f"imaginary expectation residue {max_im:.3e} exceeds 1e-10")
    return total


def expectation(h: PauliSum, s: StateVector, threads: int | None = None) -> float:
    """Energy <psi|H|psi> of a normalized state under a Pauli-sum operator."""
    if h.n_qubits != s.n_qubits:
        raise ShapeMismatchError(
            f"operator on {h.n_qubits} qubits, state on {s.n_qubits}"
        )
    _check_normalized(s)
    return expectation_raw(h, s.amps, resolve_threads(threads))


def overlap_sq(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for normalized states; phase-invariant, in [0, 1]."""
    if a.n_qubits != b.n_qubits:
        raise ShapeMismatchError(
            f"states on {a.n_qubits} and {b.n_qubits} qubits"
        )
    _check_normalized(a)
    _check_normalized(b)
    v = kernels.get().inner_product(a.amps, b.amps)
    return v.real * v.real + v.imag * v.imag
