"""Pure-numpy fallback kernels.

Same contracts as ``numba_backend``; used when numba is unavailable or when
``VQEMETA_BACKEND=numpy`` forces vectorized numpy. Slower on program
execution (one Python dispatch per gate) and does not benefit from worker
threads, but numerically interchangeable.
"""

import numpy as np

OP_RY = 0
OP_RZ = 1
OP_CNOT = 2
OP_PROT = 3
OP_X = 4

_I_POW = np.array([1, 1j, -1, -1j], dtype=np.complex128)


def _ipow(k):
    return _I_POW[int(k) & 3]


def _signs(idx, mask):
    # (-1)^parity(idx & mask) as a float array
    return 1.0 - 2.0 * (np.bitwise_count(idx & np.int64(mask)) & 1)


def _pair_view(amps, q):
    return amps.reshape(-1, 2, 1 << q)


def _apply_ry(amps, q, theta):
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    v = _pair_view(amps, q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :].copy()
    v[:, 0, :] = c * a0 - s * a1
    v[:, 1, :] = s * a0 + c * a1


def _apply_rz(amps, q, theta):
    v = _pair_view(amps, q)
    v[:, 0, :] *= np.exp(-0.5j * theta)
    v[:, 1, :] *= np.exp(0.5j * theta)


def _apply_x(amps, q):
    v = _pair_view(amps, q)
    t = v[:, 0, :].copy()
    v[:, 0, :] = v[:, 1, :]
    v[:, 1, :] = t


def _apply_cnot(amps, control, target):
    idx = np.arange(amps.shape[0], dtype=np.int64)
    sel = ((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 0)
    i0 = idx[sel]
    i1 = i0 | (1 << target)
    t = amps[i0].copy()
    amps[i0] = amps[i1]
    amps[i1] = t


def _half_indices(n_amp, pivot):
    g = np.arange(n_amp >> 1, dtype=np.int64)
    low = (np.int64(1) << pivot) - 1
    return ((g >> pivot) << (pivot + 1)) | (g & low)


def _apply_prot(amps, xm, zm, theta):
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    ny = int(bin(xm & zm).count("1"))
    w = -1j * s * _ipow(ny)
    if xm == 0:
        idx = np.arange(amps.shape[0], dtype=np.int64)
        amps *= c + w * _signs(idx, zm)
        return
    pv = (xm & -xm).bit_length() - 1
    i = _half_indices(amps.shape[0], pv)
    j = i ^ np.int64(xm)
    si = _signs(i, zm)
    sj = si if ny % 2 == 0 else -si
    ai = amps[i].copy()
    aj = amps[j].copy()
    amps[i] = c * ai + w * sj * aj
    amps[j] = c * aj + w * si * ai


def exec_program(ops, q0, q1, pidx, coef, xm, zm, theta, shift_idx, shift_delta, amps):
    for k in range(ops.shape[0]):
        op = ops[k]
        angle = coef[k] * theta[pidx[k]] if pidx[k] >= 0 else coef[k]
        if k == shift_idx:
            angle = angle + shift_delta
        if op == OP_RY:
            _apply_ry(amps, int(q0[k]), angle)
        elif op == OP_RZ:
            _apply_rz(amps, int(q0[k]), angle)
        elif op == OP_CNOT:
            _apply_cnot(amps, int(q0[k]), int(q1[k]))
        elif op == OP_PROT:
            _apply_prot(amps, int(xm[k]), int(zm[k]), angle)
        else:
            _apply_x(amps, int(q0[k]))


def apply_pauli_string(src, dst, xm, zm):
    idx = np.arange(src.shape[0], dtype=np.int64)
    k = idx ^ np.int64(xm)
    pf = _ipow(int(bin(xm & zm).count("1")))
    dst[:] = pf * _signs(k, zm) * src[k]


def _expect_term(amps, xm, zm):
    idx = np.arange(amps.shape[0], dtype=np.int64)
    ny = int(bin(xm & zm).count("1"))
    v = np.conj(amps) * amps[idx ^ np.int64(xm)] * _signs(idx, zm)
    return _ipow(-ny) * np.sum(v)


def expectation_terms(amps, xms, zms, coefs):
    total = 0.0
    max_im = 0.0
    for t in range(xms.shape[0]):
        e = _expect_term(amps, int(xms[t]), int(zms[t]))
        total += coefs[t] * e.real
        max_im = max(max_im, abs(coefs[t] * e.imag))
    return total, max_im


def inner_product(a, b):
    return complex(np.sum(np.conj(a) * b))


def norm_sq(amps):
    return float(np.sum(amps.real**2 + amps.imag**2))


def eval_shifted_objectives(ops, q0, q1, pidx, coef, xm, zm, theta,
                            shift_idxs, shift_deltas, hx, hz, hc,
                            refs, beta, n_amp):
    m = shift_idxs.shape[0]
    out = np.empty(m)
    for j in range(m):
        amps = np.zeros(n_amp, dtype=np.complex128)
        amps[0] = 1.0
        exec_program(ops, q0, q1, pidx, coef, xm, zm, theta,
                     int(shift_idxs[j]), float(shift_deltas[j]), amps)
        e, _ = expectation_terms(amps, hx, hz, hc)
        for r in range(refs.shape[0]):
            v = inner_product(refs[r], amps)
            e += beta * (v.real * v.real + v.imag * v.imag)
        out[j] = e
    return out


def wht_inplace(v):
    n = v.shape[0]
    h = 1
    while h < n:
        m = v.reshape(-1, 2, h)
        x = m[:, 0, :].copy()
        y = m[:, 1, :].copy()
        m[:, 0, :] = x + y
        m[:, 1, :] = x - y
        h *= 2


def decompose_xm_block(m, xm):
    dim = m.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    v = np.ascontiguousarray(m[idx, idx ^ np.int64(xm)])
    wht_inplace(v)
    zm = idx
    return _I_POW[np.bitwise_count(np.int64(xm) & zm) & 3] * v / dim
