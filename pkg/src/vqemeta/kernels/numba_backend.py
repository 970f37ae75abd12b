"""Jitted statevector kernels.

All kernels are serial ``@njit(nogil=True)`` functions: parallelism happens
one level up, where independent evaluations run on a thread pool while these
kernels release the GIL. Keeping the kernels serial makes every reduction
order fixed, so results are bitwise identical across thread counts.

Pauli strings arrive as two int64 bitmasks: bit q of ``xm`` set means an X
component on qubit q, bit q of ``zm`` a Z component; both set means Y.
Qubit 0 is the least-significant bit of the amplitude index.
"""

import cmath
import math

import numpy as np
from numba import njit

# Gate opcodes shared with the instruction encoder (see kernels.__init__).
OP_RY = 0
OP_RZ = 1
OP_CNOT = 2
OP_PROT = 3
OP_X = 4

_CHUNK = 4096


@njit(nogil=True, cache=True)
def _parity(v):
    v ^= v >> 32
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return v & 1


@njit(nogil=True, cache=True)
def _popcount(v):
    c = 0
    while v:
        v &= v - 1
        c += 1
    return c


@njit(nogil=True, cache=True)
def _ipow(k):
    k &= 3
    if k == 0:
        return 1.0 + 0.0j
    if k == 1:
        return 0.0 + 1.0j
    if k == 2:
        return -1.0 + 0.0j
    return 0.0 - 1.0j


@njit(nogil=True, cache=True)
def _apply_ry(amps, q, theta):
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    bit = np.int64(1) << q
    low = bit - 1
    for g in range(amps.shape[0] >> 1):
        i0 = ((g >> q) << (q + 1)) | (g & low)
        i1 = i0 | bit
        a0 = amps[i0]
        a1 = amps[i1]
        amps[i0] = c * a0 - s * a1
        amps[i1] = s * a0 + c * a1


@njit(nogil=True, cache=True)
def _apply_rz(amps, q, theta):
    p0 = cmath.exp(-0.5j * theta)
    p1 = cmath.exp(0.5j * theta)
    bit = np.int64(1) << q
    low = bit - 1
    for g in range(amps.shape[0] >> 1):
        i0 = ((g >> q) << (q + 1)) | (g & low)
        amps[i0] = p0 * amps[i0]
        amps[i0 | bit] = p1 * amps[i0 | bit]


@njit(nogil=True, cache=True)
def _apply_x(amps, q):
    bit = np.int64(1) << q
    low = bit - 1
    for g in range(amps.shape[0] >> 1):
        i0 = ((g >> q) << (q + 1)) | (g & low)
        i1 = i0 | bit
        t = amps[i0]
        amps[i0] = amps[i1]
        amps[i1] = t


@njit(nogil=True, cache=True)
def _apply_cnot(amps, control, target):
    cbit = np.int64(1) << control
    tbit = np.int64(1) << target
    low = tbit - 1
    for g in range(amps.shape[0] >> 1):
        i0 = ((g >> target) << (target + 1)) | (g & low)
        if i0 & cbit:
            i1 = i0 | tbit
            t = amps[i0]
            amps[i0] = amps[i1]
            amps[i1] = t


@njit(nogil=True, cache=True)
def _apply_prot(amps, xm, zm, theta):
    # exp(-i*theta*P/2) = cos(theta/2)*I - i*sin(theta/2)*P, valid since P^2 = I.
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    ny = _popcount(xm & zm)
    w = -1j * s * _ipow(ny)
    if xm == 0:
        p0 = c + w
        p1 = c - w
        for i in range(amps.shape[0]):
            if _parity(i & zm):
                amps[i] = p1 * amps[i]
            else:
                amps[i] = p0 * amps[i]
        return
    pv = 0
    while not (xm >> pv) & 1:
        pv += 1
    low = (np.int64(1) << pv) - 1
    q = ny & 1
    for g in range(amps.shape[0] >> 1):
        i = ((g >> pv) << (pv + 1)) | (g & low)
        j = i ^ xm
        pi = _parity(i & zm)
        pj = pi ^ q
        ai = amps[i]
        aj = amps[j]
        wi = -w if pj else w
        wj = -w if pi else w
        amps[i] = c * ai + wi * aj
        amps[j] = c * aj + wj * ai


@njit(nogil=True, cache=True)
def exec_program(ops, q0, q1, pidx, coef, xm, zm, theta, shift_idx, shift_delta, amps):
    """Run an encoded gate program in place on ``amps``.

    Gate angle is ``coef[k] * theta[pidx[k]]`` for parameterized gates and
    ``coef[k]`` for fixed ones; instruction ``shift_idx`` (if >= 0) gets
    ``shift_delta`` added to its realized angle, which is how the
    parameter-shift rule evaluates single-occurrence shifts.
    """
    for k in range(ops.shape[0]):
        op = ops[k]
        if pidx[k] >= 0:
            angle = coef[k] * theta[pidx[k]]
        else:
            angle = coef[k]
        if k == shift_idx:
            angle += shift_delta
        if op == OP_RY:
            _apply_ry(amps, q0[k], angle)
        elif op == OP_RZ:
            _apply_rz(amps, q0[k], angle)
        elif op == OP_CNOT:
            _apply_cnot(amps, q0[k], q1[k])
        elif op == OP_PROT:
            _apply_prot(amps, xm[k], zm[k], angle)
        else:
            _apply_x(amps, q0[k])


@njit(nogil=True, cache=True)
def apply_pauli_string(src, dst, xm, zm):
    """dst <- P src for the Pauli string (xm, zm)."""
    pf = _ipow(_popcount(xm & zm))
    for j in range(src.shape[0]):
        k = j ^ xm
        if _parity(k & zm):
            dst[j] = -pf * src[k]
        else:
            dst[j] = pf * src[k]


@njit(nogil=True, cache=True)
def _expect_term(amps, xm, zm):
    # <P> = (-i)^nY * sum_j (-1)^parity(j & zm) * conj(a_j) * a_{j^xm},
    # accumulated in fixed chunks so the order never depends on threading.
    n = amps.shape[0]
    tot = 0.0 + 0.0j
    start = 0
    while start < n:
        stop = min(start + _CHUNK, n)
        part = 0.0 + 0.0j
        for j in range(start, stop):
            v = np.conj(amps[j]) * amps[j ^ xm]
            if _parity(j & zm):
                part -= v
            else:
                part += v
        tot += part
        start = stop
    ny = _popcount(xm & zm)
    return _ipow(-ny) * tot


@njit(nogil=True, cache=True)
def expectation_terms(amps, xms, zms, coefs):
    """Sum of coefs[t] * <P_t>, term results combined in index order.

    Returns (real part, max imaginary residual over terms).
    """
    total = 0.0
    max_im = 0.0
    for t in range(xms.shape[0]):
        e = _expect_term(amps, xms[t], zms[t])
        total += coefs[t] * e.real
        im = abs(coefs[t] * e.imag)
        if im > max_im:
            max_im = im
    return total, max_im


@njit(nogil=True, cache=True)
def inner_product(a, b):
    """<a|b> with chunked accumulation."""
    n = a.shape[0]
    tot = 0.0 + 0.0j
    start = 0
    while start < n:
        stop = min(start + _CHUNK, n)
        part = 0.0 + 0.0j
        for j in range(start, stop):
            part += np.conj(a[j]) * b[j]
        tot += part
        start = stop
    return tot


@njit(nogil=True, cache=True)
def norm_sq(amps):
    n = amps.shape[0]
    tot = 0.0
    start = 0
    while start < n:
        stop = min(start + _CHUNK, n)
        part = 0.0
        for j in range(start, stop):
            v = amps[j]
            part += v.real * v.real + v.imag * v.imag
        tot += part
        start = stop
    return tot


@njit(nogil=True, cache=True)
def eval_shifted_objectives(ops, q0, q1, pidx, coef, xm, zm, theta,
                            shift_idxs, shift_deltas, hx, hz, hc,
                            refs, beta, n_amp):
    """Objective values for a batch of single-occurrence angle shifts.

    Runs the whole batch without touching Python: one reused amplitude
    buffer, program execution, Pauli-sum energy, and optional deflation
    penalties beta * |<ref|psi>|^2 per reference row. This is the hot path
    of parameter-shift gradients; thread pools call it once per chunk.
    """
    m = shift_idxs.shape[0]
    out = np.empty(m)
    amps = np.empty(n_amp, dtype=np.complex128)
    for j in range(m):
        for i in range(n_amp):
            amps[i] = 0.0
        amps[0] = 1.0
        exec_program(ops, q0, q1, pidx, coef, xm, zm, theta,
                     shift_idxs[j], shift_deltas[j], amps)
        e, _ = expectation_terms(amps, hx, hz, hc)
        for r in range(refs.shape[0]):
            v = inner_product(refs[r], amps)
            e += beta * (v.real * v.real + v.imag * v.imag)
        out[j] = e
    return out


@njit(nogil=True, cache=True)
def wht_inplace(v):
    """Unnormalized fast Walsh-Hadamard transform."""
    n = v.shape[0]
    h = 1
    while h < n:
        for start in range(0, n, h * 2):
            for j in range(start, start + h):
                x = v[j]
                y = v[j + h]
                v[j] = x + y
                v[j + h] = x - y
        h *= 2


@njit(nogil=True, cache=True)
def decompose_xm_block(m, xm):
    """Coefficients Tr(P M)/2^n for all strings sharing the X-mask ``xm``.

    Gathers v_k = M[k, k^xm]; the sum over k of (-1)^parity(k & zm) * v_k
    for every zm is exactly the Walsh-Hadamard transform of v, so one block
    costs O(n 2^n) instead of O(4^n).
    """
    dim = m.shape[0]
    v = np.empty(dim, dtype=np.complex128)
    for k in range(dim):
        v[k] = m[k, k ^ xm]
    wht_inplace(v)
    inv = 1.0 / dim
    out = np.empty(dim, dtype=np.complex128)
    for zm in range(dim):
        out[zm] = _ipow(_popcount(xm & zm)) * v[zm] * inv
    return out
