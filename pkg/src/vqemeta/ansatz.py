"""Parameterized circuit programs and analytic gradients.

Programs are encoded as flat instruction arrays executed by a single kernel
call, so one energy evaluation is one trip through jitted code. The
parameter-shift rule shifts one gate occurrence at a time by +-pi/2 (exact
for half-angle Pauli generators) and applies the chain rule for scaled
angles; shifted evaluations are independent and can run on a thread pool.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from ._fermion import excitation_generator
from .errors import ParseError, ShapeMismatchError, ValidationError
from .pauli import PauliSum
from .parallel import parallel_map, resolve_threads
from .statevector import SIMULATOR_CAP, StateVector

HEA = "hea"
UCCSD = "uccsd"


@dataclass(frozen=True)
class ExcitationList:
    """Spin-conserving excitations out of the Hartree-Fock reference."""

    singles: tuple[tuple[int, int], ...]
    doubles: tuple[tuple[tuple[int, int], tuple[int, int]], ...]

    def __len__(self):
        return len(self.singles) + len(self.doubles)


@dataclass
class AnsatzProgram:
    """Encoded gate sequence with a parameter-index binding per instruction.

    ``coef`` scales the bound parameter (realized angle = coef * theta[pidx])
    or holds the fixed angle when ``pidx`` is -1. The descriptor fields
    (``layers`` / ``n_spin_orbitals`` / ``n_electrons``) reproduce the build.
    """

    n_qubits: int
    kind: str
    n_params: int
    ops: np.ndarray
    q0: np.ndarray
    q1: np.ndarray
    pidx: np.ndarray
    coef: np.ndarray
    xm: np.ndarray
    zm: np.ndarray
    layers: int = 0
    n_spin_orbitals: int = 0
    n_electrons: int = 0
    excitations: ExcitationList | None = None
    _bound: list[np.ndarray] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_qubits > SIMULATOR_CAP:
            raise ValidationError(f"unsupported qubit count {self.n_qubits}")
        referenced = set(int(p) for p in self.pidx if p >= 0)
        if self.n_params and referenced != set(range(self.n_params)):
            raise ValidationError("every parameter index must be referenced")
        if np.any((self.q0 < 0) | (self.q0 >= self.n_qubits)):
            raise ValidationError("gate target out of range")

    @property
    def n_instructions(self) -> int:
        return int(self.ops.shape[0])

    def bound_instructions(self) -> list[np.ndarray]:
        """Instruction indices carrying each parameter, in program order."""
        if not self._bound:
            self._bound = [
                np.nonzero(self.pidx == p)[0] for p in range(self.n_params)
            ]
        return self._bound

    def instructions(self) -> list[tuple]:
        """Readable (name, ...) tuples, mainly for tests and debugging."""
        names = {kernels.OP_RY: "ry", kernels.OP_RZ: "rz", kernels.OP_CNOT: "cnot",
                 kernels.OP_PROT: "prot", kernels.OP_X: "x"}
        out = []
        for k in range(self.n_instructions):
            op = names[int(self.ops[k])]
            if op == "cnot":
                out.append((op, int(self.q0[k]), int(self.q1[k])))
            elif op == "x":
                out.append((op, int(self.q0[k])))
            elif op == "prot":
                out.append((op, int(self.xm[k]), int(self.zm[k]),
                            int(self.pidx[k]), float(self.coef[k])))
            else:
                out.append((op, int(self.q0[k]), int(self.pidx[k]), float(self.coef[k])))
        return out

    def to_descriptor(self) -> str:
        lines = [f"kind {self.kind}", f"qubits {self.n_qubits}"]
        if self.kind == HEA:
            lines.append(f"layers {self.layers}")
        else:
            lines.append(f"spin_orbitals {self.n_spin_orbitals}")
            lines.append(f"electrons {self.n_electrons}")
        return "\n".join(lines) + "\n"


def ansatz_from_descriptor(text: str) -> AnsatzProgram:
    """Rebuild a program from its text descriptor."""
    fields = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'key value', got {raw!r}", no)
        fields[parts[0]] = parts[1]
    kind = fields.get("kind")
    if kind == HEA:
        return build_hea(int(fields["qubits"]), int(fields["layers"]))
    if kind == UCCSD:
        program, _ = build_uccsd(int(fields["spin_orbitals"]), int(fields["electrons"]))
        return program
    raise ParseError(f"unknown ansatz kind {kind!r}")


class _Builder:
    def __init__(self):
        self.rows: list[tuple[int, int, int, int, float, int, int]] = []

    def add(self, op, q0=0, q1=0, pidx=-1, coef=0.0, xm=0, zm=0):
        self.rows.append((op, q0, q1, pidx, coef, xm, zm))

    def arrays(self):
        cols = list(zip(*self.rows)) if self.rows else [[]] * 7
        return (
            np.array(cols[0], dtype=np.int64),
            np.array(cols[1], dtype=np.int64),
            np.array(cols[2], dtype=np.int64),
            np.array(cols[3], dtype=np.int64),
            np.array(cols[4], dtype=np.float64),
            np.array(cols[5], dtype=np.int64),
            np.array(cols[6], dtype=np.int64),
        )


def build_hea(n_qubits: int, layers: int) -> AnsatzProgram:
    """Layered hardware-efficient ansatz: per layer, RY then RZ on every
    qubit (qubits ascending), then CNOT(i, j) for every pair i < j in
    lexicographic order with i as control. 2 * n_qubits * layers parameters.
    """
    if n_qubits < 1 or layers < 1:
        raise ValidationError("n_qubits and layers must be >= 1")
    b = _Builder()
    for layer in range(layers):
        base = 2 * layer * n_qubits
        for q in range(n_qubits):
            b.add(kernels.OP_RY, q0=q, pidx=base + 2 * q, coef=1.0)
            b.add(kernels.OP_RZ, q0=q, pidx=base + 2 * q + 1, coef=1.0)
        for i in range(n_qubits):
            for j in range(i + 1, n_qubits):
                b.add(kernels.OP_CNOT, q0=i, q1=j)
    ops, q0, q1, pidx, coef, xm, zm = b.arrays()
    return AnsatzProgram(
        n_qubits, HEA, 2 * n_qubits * layers, ops, q0, q1, pidx, coef, xm, zm,
        layers=layers,
    )


def enumerate_excitations(n_spin_orbitals: int, n_electrons: int) -> ExcitationList:
    """Spin-conserving singles and doubles from the lowest-filled reference.

    Spin orbitals are interleaved: even index = spin up, odd = spin down of
    spatial orbital index // 2; the reference occupies indices
    0 .. n_electrons-1.
    """
    occ = range(n_electrons)
    virt = range(n_electrons, n_spin_orbitals)
    singles = tuple(
        (i, a) for i in occ for a in virt if i % 2 == a % 2
    )
    doubles = []
    for ii, i in enumerate(occ):
        for j in list(occ)[ii + 1:]:
            for ai, a in enumerate(virt):
                for b_ in list(virt)[ai + 1:]:
                    if (i % 2 + j % 2) == (a % 2 + b_ % 2):
                        doubles.append(((i, j), (a, b_)))
    return ExcitationList(singles, tuple(doubles))


def build_uccsd(n_spin_orbitals: int, n_electrons: int) -> tuple[AnsatzProgram, ExcitationList]:
    """Unitary coupled-cluster singles-doubles program.

    X gates prepare the Hartree-Fock reference; each excitation generator is
    JW-mapped to Pauli strings with weights i*c_m and applied as a
    first-order Trotter product of Pauli rotations with angle -2*c_m*theta_e
    (so theta = 0 leaves the reference untouched and the product realizes
    exp(theta * (T - T^dag)) per excitation).
    """
    if n_spin_orbitals < 1:
        raise ValidationError("n_spin_orbitals must be >= 1")
    if not 0 <= n_electrons < n_spin_orbitals:
        raise ValidationError(
            f"invalid electron count {n_electrons} for {n_spin_orbitals} spin orbitals"
        )
    exc = enumerate_excitations(n_spin_orbitals, n_electrons)
    b = _Builder()
    for q in range(n_electrons):
        b.add(kernels.OP_X, q0=q)
    for e, (i, a) in enumerate(exc.singles):
        for x, z, c in excitation_generator((i,), (a,)):
            b.add(kernels.OP_PROT, pidx=e, coef=-2.0 * c, xm=x, zm=z)
    n_singles = len(exc.singles)
    for e, ((i, j), (a, b_)) in enumerate(exc.doubles):
        for x, z, c in excitation_generator((i, j), (a, b_)):
            b.add(kernels.OP_PROT, pidx=n_singles + e, coef=-2.0 * c, xm=x, zm=z)
    ops, q0, q1, pidx, coef, xm, zm = b.arrays()
    program = AnsatzProgram(
        n_spin_orbitals, UCCSD, len(exc), ops, q0, q1, pidx, coef, xm, zm,
        n_spin_orbitals=n_spin_orbitals, n_electrons=n_electrons, excitations=exc,
    )
    return program, exc


def run_program_raw(a: AnsatzProgram, theta: np.ndarray,
                    shift_idx: int = -1, shift_delta: float = 0.0) -> np.ndarray:
    """Execute on |0...0> and return the raw amplitude array."""
    amps = np.zeros(1 << a.n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    kernels.get().exec_program(
        a.ops, a.q0, a.q1, a.pidx, a.coef, a.xm, a.zm,
        np.ascontiguousarray(theta, dtype=np.float64), shift_idx, shift_delta, amps,
    )
    return amps


def _check_theta(a: AnsatzProgram, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (a.n_params,):
        raise ShapeMismatchError(
            f"expected {a.n_params} parameters, got shape {theta.shape}"
        )
    return theta


def run_ansatz(a: AnsatzProgram, theta: Sequence[float]) -> StateVector:
    """Prepare U(theta)|0...0>."""
    theta = _check_theta(a, theta)
    return StateVector(a.n_qubits, run_program_raw(a, theta))


def shift_rule_gradient(
    a: AnsatzProgram,
    theta: np.ndarray,
    h: PauliSum,
    refs: np.ndarray | None = None,
    beta: float = 0.0,
    threads: int = 1,
) -> np.ndarray:
    """Gradient of <H> + beta * sum_r |<ref_r|psi(theta)>|^2 by shifted runs.

    Each bound instruction contributes coef * [f(+pi/2) - f(-pi/2)] / 2 to
    its parameter. The 2 * occurrences evaluations run as one fused kernel
    call per thread chunk (program, energy, penalties all inside nogil
    code); per-evaluation values are independent of the chunking, so the
    summed gradient is identical for every thread count.
    """
    theta = _check_theta(a, theta)
    if refs is None:
        refs = np.zeros((0, 1 << a.n_qubits), dtype=np.complex128)
    occ_param = []
    occ_instr = []
    for p, instrs in enumerate(a.bound_instructions()):
        for k in instrs:
            occ_param.append(p)
            occ_instr.append(int(k))
    n_occ = len(occ_instr)
    if n_occ == 0:
        return np.zeros(a.n_params)
    shift_idxs = np.repeat(np.array(occ_instr, dtype=np.int64), 2)
    shift_deltas = np.tile(np.array([np.pi / 2, -np.pi / 2]), n_occ)
    hx, hz, hc = h.masks()
    kern = kernels.get()

    def run_chunk(bounds):
        lo, hi = bounds
        return kern.eval_shifted_objectives(
            a.ops, a.q0, a.q1, a.pidx, a.coef, a.xm, a.zm, theta,
            shift_idxs[lo:hi], shift_deltas[lo:hi], hx, hz, hc,
            refs, beta, 1 << a.n_qubits,
        )

    total = 2 * n_occ
    n_chunks = min(threads, total)
    edges = np.linspace(0, total, n_chunks + 1, dtype=int)
    parts = parallel_map(run_chunk, zip(edges[:-1], edges[1:]), threads)
    values = np.concatenate(parts)
    grad = np.zeros(a.n_params)
    for i in range(n_occ):
        k = occ_instr[i]
        grad[occ_param[i]] += float(a.coef[k]) * 0.5 * (values[2 * i] - values[2 * i + 1])
    return grad


def parameter_shift_gradient(
    a: AnsatzProgram, h: PauliSum, theta: Sequence[float], threads: int | None = None
) -> np.ndarray:
    """Analytic energy gradient d<H>/d theta via the parameter-shift rule."""
    if h.n_qubits != a.n_qubits:
        raise ShapeMismatchError(
            f"operator on {h.n_qubits} qubits, ansatz on {a.n_qubits}"
        )
    return shift_rule_gradient(
        a, np.asarray(theta, dtype=np.float64), h,
        threads=resolve_threads(threads),
    )
