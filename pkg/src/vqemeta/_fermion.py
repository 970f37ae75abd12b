"""Symbolic ladder-operator products under the Jordan-Wigner encoding.

Internal helper shared by the chemistry Hamiltonian assembly and the
coupled-cluster generator construction. Operators are dictionaries mapping
(x_mask, z_mask) string keys to complex coefficients, where the key (x, z)
stands for the actual Pauli string with Y wherever both bits are set
(i.e. i^{popcount(x&z)} X^x Z^z per qubit).
"""

from __future__ import annotations


def _popcount(v: int) -> int:
    return bin(v).count("1")


def mul_keys(x1: int, z1: int, x2: int, z2: int) -> tuple[int, int, int]:
    """Product of two encoded strings: returns (x, z, k) with phase i^k."""
    x = x1 ^ x2
    z = z1 ^ z2
    k = (
        _popcount(x1 & z1)
        + _popcount(x2 & z2)
        - _popcount(x & z)
        + 2 * _popcount(z1 & x2)
    ) & 3
    return x, z, k


_I_POW = (1 + 0j, 1j, -1 + 0j, -1j)


def ladder_terms(p: int, dagger: bool) -> list[tuple[int, int, complex]]:
    """a_p or a^dag_p as two Pauli terms: (X_p -+ i Y_p)/2 times Z on qubits < p."""
    tail = (1 << p) - 1
    y_coef = -0.5j if dagger else 0.5j
    return [(1 << p, tail, 0.5 + 0j), (1 << p, tail | (1 << p), y_coef)]


def product(factors: list[tuple[int, bool]]) -> dict[tuple[int, int], complex]:
    """Expand a product of ladder operators [(orbital, dagger), ...]."""
    acc: dict[tuple[int, int], complex] = {(0, 0): 1.0 + 0j}
    for orb, dag in factors:
        nxt: dict[tuple[int, int], complex] = {}
        for (x1, z1), c1 in acc.items():
            for x2, z2, c2 in ladder_terms(orb, dag):
                x, z, k = mul_keys(x1, z1, x2, z2)
                key = (x, z)
                nxt[key] = nxt.get(key, 0.0 + 0j) + c1 * c2 * _I_POW[k]
        acc = nxt
    return acc


def add_scaled(target: dict, source: dict, scale: complex) -> None:
    for key, coef in source.items():
        target[key] = target.get(key, 0.0 + 0j) + scale * coef


def excitation_generator(
    occupied: tuple[int, ...], virtual: tuple[int, ...]
) -> list[tuple[int, int, float]]:
    """Anti-Hermitian generator T - T^dag of one excitation, JW-mapped.

    T promotes ``occupied`` into ``virtual`` (creation operators for the
    virtual orbitals, annihilation for the occupied ones). The JW image has
    purely imaginary weights i*c_m; returns [(x_mask, z_mask, c_m), ...] in
    ascending string-key order.
    """
    factors = [(a, True) for a in virtual] + [(i, False) for i in reversed(occupied)]
    acc: dict[tuple[int, int], complex] = {}
    add_scaled(acc, product(factors), 1.0)
    hc = [(i, True) for i in occupied] + [(a, False) for a in reversed(virtual)]
    add_scaled(acc, product(hc), -1.0)
    out = []
    for (x, z), coef in sorted(acc.items()):
        if abs(coef) < 1e-14:
            continue
        if abs(coef.real) > 1e-12:
            raise AssertionError(f"generator term not anti-Hermitian: {coef}")
        out.append((x, z, float(coef.imag)))
    return out
