import numpy as np
import pytest

from vqemeta import (
    FermionIntegrals,
    ParseError,
    PauliString,
    PauliSum,
    ShoSpec,
    ValidationError,
    build_sho,
    expectation,
    ground_energy,
    jordan_wigner,
    load_fcidump,
    load_pauli_sum,
    pauli_sum_matrix,
    save_pauli_sum,
    spectrum,
    zero_state,
)
from conftest import fock_matrix


def letters_of(h):
    return {ps.letters: c for c, ps in h.terms}


class TestShoSpec:
    def test_level_energies(self):
        np.testing.assert_allclose(
            ShoSpec(0.5, 2).level_energies(), [0.25, 0.75, 1.25, 1.75]
        )

    def test_spectrum_strictly_increasing(self):
        e = ShoSpec(0.3, 5).level_energies()
        assert np.all(np.diff(e) > 0)

    def test_omega_positive(self):
        with pytest.raises(ValidationError):
            ShoSpec(0.0, 2)


class TestBuildSho:
    def test_n1_terms(self):
        h = build_sho(ShoSpec(0.5, 1))
        assert letters_of(h) == pytest.approx({"I": 0.5, "Z": -0.25})
        np.testing.assert_allclose(
            np.sort(np.linalg.eigvalsh(pauli_sum_matrix(h))), [0.25, 0.75]
        )

    def test_n2_eigenvalues(self):
        vals = spectrum(build_sho(ShoSpec(0.5, 2))).eigenvalues
        np.testing.assert_allclose(vals, [0.25, 0.75, 1.25, 1.75], atol=1e-12)

    def test_omega_scaling(self):
        h = build_sho(ShoSpec(1.0, 1))
        assert letters_of(h) == pytest.approx({"I": 1.0, "Z": -0.5})

    def test_spectrum_matches_levels(self):
        for n in (2, 3, 4, 6):
            spec = ShoSpec(0.5, n)
            vals = spectrum(build_sho(spec)).eigenvalues
            np.testing.assert_allclose(vals, spec.level_energies(), atol=1e-10)

    def test_ground_state_is_vacuum(self):
        for omega in (0.4, 0.5, 1.3):
            h = build_sho(ShoSpec(omega, 3))
            assert expectation(h, zero_state(3)) == pytest.approx(omega / 2, abs=1e-12)

    def test_term_count_linear(self):
        assert build_sho(ShoSpec(0.5, 6)).n_terms == 7

    def test_beyond_dense_cap(self):
        # the diagonal route works past the dense-matrix cap
        h = build_sho(ShoSpec(0.5, 14))
        assert h.n_terms == 15
        assert expectation(h, zero_state(14)) == pytest.approx(0.25, abs=1e-12)


class TestFcidumpLoader:
    def test_one_body_line(self, tmp_path):
        p = tmp_path / "f.fcidump"
        p.write_text("&FCI NORB=2,NELEC=2,\n&END\n1.5 1 1 0 0\n")
        ints = load_fcidump(p)
        assert ints.n_spin_orbitals == 4
        assert ints.one_body[0, 0] == 1.5  # spin-up of orbital 1
        assert ints.one_body[1, 1] == 1.5  # spin-down of orbital 1
        assert ints.one_body[2, 2] == 0.0
        assert ints.n_electrons == 2

    def test_core_energy_line(self, tmp_path):
        p = tmp_path / "f.fcidump"
        p.write_text("&FCI NORB=1,NELEC=0,\n&END\n0.7 0 0 0 0\n")
        assert load_fcidump(p).core_energy == 0.7

    def test_symmetry_completion(self, tmp_path):
        p = tmp_path / "f.fcidump"
        p.write_text("&FCI NORB=2,NELEC=2,\n&END\n0.25 1 2 0 0\n")
        ints = load_fcidump(p)
        assert ints.one_body[0, 2] == 0.25
        assert ints.one_body[2, 0] == 0.25

    def test_conflicting_duplicate_rejected(self, tmp_path):
        p = tmp_path / "f.fcidump"
        p.write_text("&FCI NORB=2,NELEC=2,\n&END\n0.25 1 2 0 0\n0.35 2 1 0 0\n")
        with pytest.raises(ValidationError):
            load_fcidump(p)

    def test_parse_error_carries_line_number(self, tmp_path):
        p = tmp_path / "f.fcidump"
        p.write_text("&FCI NORB=1,NELEC=0,\n&END\nnot a number 0 0\n")
        with pytest.raises(ParseError) as err:
            load_fcidump(p)
        assert err.value.line_no == 3

    def test_every_line_consumed_or_located(self, tmp_path):
        p = tmp_path / "f.fcidump"
        p.write_text("&FCI NORB=1,NELEC=0,\n&END\n0.5 1 1 0 0\n1 2 3\n")
        with pytest.raises(ParseError) as err:
            load_fcidump(p)
        assert err.value.line_no == 4

    def test_missing_header(self, tmp_path):
        p = tmp_path / "f.fcidump"
        p.write_text("0.5 1 1 0 0\n")
        with pytest.raises(ParseError):
            load_fcidump(p)

    def test_round_trip_against_fock_oracle(self, tmp_path, rng):
        # hand-assembled 2-spatial-orbital instance, both integral kinds
        text = (
            "&FCI NORB=2,NELEC=2,\n&END\n"
            "0.9 1 1 1 1\n0.55 1 1 2 2\n0.21 1 2 1 2\n0.62 2 2 2 2\n"
            "-1.1 1 1 0 0\n-0.6 2 2 0 0\n-0.05 1 2 0 0\n0.3 0 0 0 0\n"
        )
        p = tmp_path / "f.fcidump"
        p.write_text(text)
        ints = load_fcidump(p)
        h = jordan_wigner(ints)
        dense = fock_matrix(ints)
        got = ground_energy(h)
        want = float(np.linalg.eigvalsh(dense)[0])
        assert got == pytest.approx(want, abs=1e-10)

    def test_consistent_duplicates_accepted(self, tmp_path):
        p = tmp_path / "f.fcidump"
        p.write_text("&FCI NORB=2,NELEC=2,\n&END\n0.25 1 2 0 0\n0.25 2 1 0 0\n")
        ints = load_fcidump(p)
        assert ints.one_body[0, 2] == 0.25

    def test_six_spin_orbital_oracle_round_trip(self, rng):
        n = 6
        one = rng.normal(size=(n, n))
        one = 0.5 * (one + one.T)
        two = np.zeros((n, n, n, n))
        # sparse random two-body entries, Hermiticity-completed
        for _ in range(10):
            p_, q_, r_, s_ = (int(x) for x in rng.integers(0, n, 4))
            v = float(rng.normal())
            two[p_, q_, r_, s_] = v
            two[s_, r_, q_, p_] = v
        ints = FermionIntegrals(n, one, two, core_energy=0.3)
        got = ground_energy(jordan_wigner(ints))
        want = float(np.linalg.eigvalsh(fock_matrix(ints))[0])
        assert got == pytest.approx(want, abs=1e-10)

    def test_physicist_ordering_flag(self, tmp_path):
        # <12|12> in physicist notation equals (11|22) in chemist notation
        chem = tmp_path / "chem.fcidump"
        chem.write_text("&FCI NORB=2,NELEC=2,\n&END\n0.4 1 1 2 2\n")
        phys = tmp_path / "phys.fcidump"
        phys.write_text("&FCI NORB=2,NELEC=2,\n&END\n0.4 1 2 1 2\n")
        a = load_fcidump(chem, "chemist")
        b = load_fcidump(phys, "physicist")
        np.testing.assert_allclose(a.two_body, b.two_body)


class TestJordanWigner:
    def test_number_operator(self):
        ints = FermionIntegrals(1, np.array([[1.0]]), np.zeros((1, 1, 1, 1)))
        h = jordan_wigner(ints)
        assert letters_of(h) == pytest.approx({"I": 0.5, "Z": -0.5})

    def test_hopping_term(self):
        one = np.array([[0.0, 1.0], [1.0, 0.0]])
        h = jordan_wigner(FermionIntegrals(2, one, np.zeros((2, 2, 2, 2))))
        assert letters_of(h) == pytest.approx({"XX": 0.5, "YY": 0.5})

    def test_hopping_matches_fock_oracle(self):
        one = np.array([[0.0, 1.0], [1.0, 0.0]])
        ints = FermionIntegrals(2, one, np.zeros((2, 2, 2, 2)))
        np.testing.assert_allclose(
            pauli_sum_matrix(jordan_wigner(ints)), fock_matrix(ints), atol=1e-12
        )

    def test_core_energy_on_identity(self):
        ints = FermionIntegrals(1, np.zeros((1, 1)), np.zeros((1, 1, 1, 1)), core_energy=0.7)
        h = jordan_wigner(ints)
        assert letters_of(h) == pytest.approx({"I": 0.7})

    def test_random_integrals_hermitian(self, rng):
        n = 4
        one = rng.normal(size=(n, n))
        one = 0.5 * (one + one.T)
        two = rng.normal(size=(n, n, n, n))
        two = 0.5 * (two + two.transpose(3, 2, 1, 0))
        h = jordan_wigner(FermionIntegrals(n, one, two))
        m = pauli_sum_matrix(h)
        assert np.max(np.abs(m - m.conj().T)) <= 1e-10
        for coef, _ in h.terms:
            assert isinstance(coef, float)

    def test_matches_fock_oracle_with_two_body(self, rng):
        n = 4
        one = rng.normal(size=(n, n))
        one = 0.5 * (one + one.T)
        two = rng.normal(size=(n, n, n, n))
        two = 0.5 * (two + two.transpose(3, 2, 1, 0))
        ints = FermionIntegrals(n, one, two)
        np.testing.assert_allclose(
            pauli_sum_matrix(jordan_wigner(ints)), fock_matrix(ints), atol=1e-10
        )

    def test_number_conservation_block_structure(self, h2_fcidump):
        ints = load_fcidump(h2_fcidump)
        hm = pauli_sum_matrix(jordan_wigner(ints))
        dim = hm.shape[0]
        count = np.array([bin(i).count("1") for i in range(dim)])
        number_op = np.diag(count.astype(complex))
        comm = hm @ number_op - number_op @ hm
        assert np.max(np.abs(comm)) <= 1e-9

    def test_asymmetric_integrals_rejected(self, rng):
        one = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValidationError):
            jordan_wigner(FermionIntegrals(2, one, np.zeros((2, 2, 2, 2))))

    def test_h2_reference_energies(self, h2_fcidump):
        # standard minimal-basis hydrogen-molecule instance
        h = jordan_wigner(load_fcidump(h2_fcidump))
        assert h.n_qubits == 4
        assert h.n_terms == 15
        assert ground_energy(h) == pytest.approx(-1.1372698361356885, abs=1e-9)


class TestPauliSumFiles:
    def test_documented_example(self, tmp_path):
        p = tmp_path / "sho.txt"
        p.write_text("# comment\nqubits 1\n0.5 I\n-0.25 Z\n")
        h = load_pauli_sum(p)
        assert letters_of(h) == pytest.approx({"I": 0.5, "Z": -0.25})

    def test_empty_term_list_is_zero_operator(self, tmp_path, rng):
        from vqemeta import random_state

        p = tmp_path / "zero.txt"
        p.write_text("qubits 2\n")
        h = load_pauli_sum(p)
        assert h.n_terms == 0
        assert expectation(h, random_state(2, rng)) == 0.0

    def test_round_trip_exact(self, tmp_path, rng):
        terms = {}
        while len(terms) < 12:
            letters = "".join(rng.choice(list("IXYZ"), 3))
            terms[letters] = rng.normal()
        h = PauliSum.from_terms(
            3, [(c, PauliString.from_letters(s)) for s, c in terms.items()]
        )
        p = tmp_path / "h.txt"
        save_pauli_sum(h, p)
        again = load_pauli_sum(p)
        assert again.n_terms == h.n_terms
        for (c1, p1), (c2, p2) in zip(h.terms, again.terms):
            assert p1 == p2
            assert c2 == pytest.approx(c1, rel=1e-15)

    def test_malformed_line_number(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("qubits 1\n0.5 I\nwhat\n")
        with pytest.raises(ParseError) as err:
            load_pauli_sum(p)
        assert err.value.line_no == 3

    def test_length_mismatch(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("qubits 2\n0.5 IIZ\n")
        with pytest.raises(ValidationError):
            load_pauli_sum(p)

    def test_missing_header(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("0.5 I\n")
        with pytest.raises(ParseError):
            load_pauli_sum(p)

    def test_scientific_notation_coefficients(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("qubits 1\n-2.5e-03 Z\n")
        h = load_pauli_sum(p)
        assert h.coefficient(PauliString.from_letters("Z")) == -2.5e-3

    def test_extreme_coefficients_round_trip_exactly(self, tmp_path):
        values = [1e-300, -3.7e200, np.pi, 1 / 3, 5e-324]
        letters = ["ZI", "IZ", "XX", "YY", "ZZ"]
        h = PauliSum.from_terms(
            2, [(v, PauliString.from_letters(s)) for v, s in zip(values, letters)]
        )
        p = tmp_path / "h.txt"
        save_pauli_sum(h, p)
        again = load_pauli_sum(p)
        for v, s in zip(values, letters):
            assert again.coefficient(PauliString.from_letters(s)) == v
