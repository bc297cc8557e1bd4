import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentbound.pauli import (
    OperatorPoly,
    PauliString,
    all_strings,
    canonical_key,
    from_label,
    from_letters,
    identity,
    multiply,
    single_site,
    strings_up_to_weight,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
ONE_QUBIT = {"I": I2, "X": X, "Y": Y, "Z": Z}


def dense(p: PauliString) -> np.ndarray:
    """Independent kron oracle (site 0 = leftmost factor)."""
    out = np.array([[1.0 + 0j]])
    for site in range(p.n):
        out = np.kron(out, ONE_QUBIT[p.letter(site)])
    return out


def random_string(rng, n):
    return PauliString(n, int(rng.integers(0, 2**n)), int(rng.integers(0, 2**n)))


class TestPauliString:
    def test_letters_roundtrip(self):
        for word in ["I", "X", "ZYX", "IXYZ", "YYII"]:
            assert from_letters(word).letters() == word

    def test_labels(self):
        p = from_label("X1 Z3", 4)
        assert p.letters() == "XIZI"
        assert p.label() == "X1 Z3"
        assert from_label("I", 2).is_identity
        assert from_label("", 2).is_identity
        with pytest.raises(ValueError):
            from_label("X5", 3)

    def test_weight_and_support(self):
        p = from_letters("XIYI")
        assert p.weight == 2
        assert p.support() == (0, 2)
        assert identity(4).weight == 0

    def test_multiply_against_dense(self):
        rng = np.random.default_rng(11)
        for n in (1, 2, 3):
            for _ in range(80):
                a, b = random_string(rng, n), random_string(rng, n)
                ph = multiply(a, b)
                got = ph.phase.value * dense(ph.string)
                want = dense(a) @ dense(b)
                assert np.allclose(got, want), f"{a.letters()} * {b.letters()}"

    def test_square_is_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            p = random_string(rng, 3)
            ph = multiply(p, p)
            assert ph.string.is_identity and ph.phase.value == 1

    def test_commutes_with_matches_dense(self):
        rng = np.random.default_rng(7)
        for _ in range(60):
            a, b = random_string(rng, 3), random_string(rng, 3)
            comm = dense(a) @ dense(b) - dense(b) @ dense(a)
            assert a.commutes_with(b) == np.allclose(comm, 0)

    def test_single_qubit_order(self):
        labels = [p.letters() for p in sorted(all_strings(1))]
        assert labels == ["I", "X", "Y", "Z"]

    def test_sort_key_total_order(self):
        keys = [canonical_key(p) for p in all_strings(2)]
        assert len(set(keys)) == 16

    def test_strings_up_to_weight_counts(self):
        # identity + 3n singles + 9*C(n,2) doubles
        assert len(strings_up_to_weight(3, 2)) == 1 + 9 + 27
        assert len(strings_up_to_weight(4, 2)) == 1 + 12 + 54
        assert len(all_strings(2)) == 16

    @given(st.integers(0, 63), st.integers(0, 63), st.integers(0, 63),
           st.integers(0, 63), st.integers(0, 63), st.integers(0, 63))
    @settings(max_examples=120, deadline=None)
    def test_multiply_associative(self, ax, az, bx, bz, cx, cz):
        a = PauliString(6, ax, az)
        b = PauliString(6, bx, bz)
        c = PauliString(6, cx, cz)
        ab = multiply(a, b)
        bc = multiply(b, c)
        left = multiply(ab.string, c)
        right = multiply(a, bc.string)
        assert left.string == right.string
        assert ab.phase.times(left.phase.value) == bc.phase.times(right.phase.value)


class TestOperatorPoly:
    def test_matmul_against_dense(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            terms_a = [(random_string(rng, 2), complex(rng.normal(), rng.normal()))
                       for _ in range(3)]
            terms_b = [(random_string(rng, 2), complex(rng.normal(), rng.normal()))
                       for _ in range(3)]
            pa = OperatorPoly(2, dict(terms_a))
            pb = OperatorPoly(2, dict(terms_b))
            da = sum(c * dense(p) for p, c in pa.items())
            db = sum(c * dense(p) for p, c in pb.items())
            dc = sum(c * dense(p) for p, c in (pa @ pb).items())
            assert np.allclose(dc, da @ db)

    def test_dagger_and_hermiticity(self):
        p = OperatorPoly.from_string(from_letters("XY"), 1j)
        assert not p.is_hermitian()
        assert (p + p.dagger()).is_hermitian()
        q = OperatorPoly.from_string(from_letters("ZI"), -2.0)
        assert q.dagger() == q

    def test_arithmetic(self):
        z1 = OperatorPoly.from_string(from_letters("ZI"))
        z2 = OperatorPoly.from_string(from_letters("IZ"))
        h = 0.5 * z1 - z2
        assert h.coeff(from_letters("ZI")) == 0.5
        assert h.coeff(from_letters("IZ")) == -1.0
        assert (h - h) == OperatorPoly.zero(2)
        assert h.one_norm() == pytest.approx(1.5)

    def test_zero_terms_are_dropped(self):
        z1 = OperatorPoly.from_string(from_letters("ZI"))
        assert len(z1 - z1) == 0
        assert not (z1 - z1)

    def test_constant(self):
        c = OperatorPoly.constant(2, 3.5)
        assert c.coeff(identity(2)) == 3.5
        assert len(c) == 1

    def test_mismatched_sizes_rejected(self):
        with pytest.raises(ValueError):
            OperatorPoly.from_string(from_letters("Z")) + OperatorPoly.from_string(
                from_letters("ZZ")
            )


def test_single_site_matches_label():
    assert single_site(3, 1, "Y") == from_label("Y2", 3)
    with pytest.raises(ValueError):
        single_site(2, 0, "Q")
