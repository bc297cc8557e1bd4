import numpy as np
import pytest

from momentbound import models, oracle
from momentbound.confidence import IntervalConstraint
from momentbound.models import BathSpec
from momentbound.pauli import (
    OperatorPoly,
    all_strings,
    from_label,
    from_letters,
    strings_up_to_weight,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def test_string_to_dense_site_order():
    # site 1 occupies the leftmost tensor factor
    got = oracle.string_to_dense(from_label("X1 Z2", 2))
    assert np.array_equal(got, np.kron(X, Z))


def test_poly_to_dense_linear():
    p = 0.5 * OperatorPoly.from_string(from_letters("XZ")) + OperatorPoly.constant(
        2, -1.0
    )
    want = 0.5 * np.kron(X, Z) - np.eye(4)
    assert np.allclose(oracle.poly_to_dense(p), want)


def test_ground_state_matches_eigh():
    rng = np.random.default_rng(17)
    for _ in range(10):
        terms = {
            p: float(rng.normal())
            for p in rng.choice(all_strings(2)[1:], size=5, replace=False)
        }
        h = OperatorPoly(2, terms)
        e0, state = oracle.exact_ground_state(h)
        dense = oracle.poly_to_dense(h)
        want = np.linalg.eigvalsh(dense)[0]
        assert e0 == pytest.approx(want, abs=1e-10)
        assert state.expectation(h) == pytest.approx(e0, abs=1e-9)
        state.check()


def test_degenerate_flag():
    _, state = oracle.exact_ground_state(OperatorPoly.from_string(from_letters("ZI")))
    assert state.degenerate
    h = models.build_tfi_2d(1, 2, g=1.0, J=1.0)
    assert not oracle.exact_ground_state(h)[1].degenerate


def steady_fixture():
    return models.build_boundary_driven(
        1, 2, g=1.0, J=1.0,
        hot=BathSpec(temperature=1.0, rate=0.001),
        cold=BathSpec(temperature=0.1, rate=0.011),
    )


def test_steady_state_residual_and_trace():
    model = steady_fixture()
    state = oracle.exact_steady_state(model)
    assert np.trace(state.rho).real == pytest.approx(1.0, abs=1e-12)
    residual = oracle.apply_lindblad_dense(model, state.rho)
    assert np.linalg.norm(residual) < 1e-9
    assert not state.degenerate


def test_liouvillian_annihilates_steady_state():
    model = steady_fixture()
    state = oracle.exact_steady_state(model)
    lv = oracle.liouvillian_matrix(model)
    assert np.linalg.norm(lv @ state.rho.reshape(-1)) < 1e-9


def test_partial_trace_consistency():
    rng = np.random.default_rng(23)
    g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    state = oracle.DenseState(rho, 3)
    reduced = oracle.partial_trace(state, [0, 2])
    assert reduced.n == 2
    assert np.trace(reduced.rho).real == pytest.approx(1.0, abs=1e-12)
    # expectations of words supported on the kept sites agree
    for label_full, label_red in [("Z1", "Z1"), ("X3", "X2"), ("Z1 Y3", "Z1 Y2")]:
        want = state.expectation(from_label(label_full, 3))
        got = reduced.expectation(from_label(label_red, 2))
        assert got == pytest.approx(want, abs=1e-12)


def test_truncated_purity_complete_and_partial():
    h = models.build_tfi_2d(1, 2, g=1.0, J=1.0)
    _, state = oracle.exact_ground_state(h)
    # the moment list includes the identity word
    full = [state.expectation(p) for p in all_strings(2)]
    assert oracle.truncated_purity(2, full) == pytest.approx(1.0, abs=1e-10)
    assert state.purity() == pytest.approx(1.0, abs=1e-10)
    sub = [state.expectation(p) for p in strings_up_to_weight(2, 1)]
    assert oracle.truncated_purity(2, sub) <= 1.0 + 1e-12
    # identity alone: the maximally-mixed floor 1/d
    assert oracle.truncated_purity(2, [1.0]) == pytest.approx(0.25)


def test_heat_current_zero_without_coupling():
    hot = BathSpec(temperature=0.5, rate=0.01)
    cold = BathSpec(temperature=0.5, rate=0.01)
    model = models.build_boundary_driven(1, 2, g=1.0, J=1.0, hot=hot, cold=cold)
    # equal temperatures: no net current through the chain
    assert oracle.exact_heat_current(model, "hot") == pytest.approx(0.0, abs=1e-10)


class TestExactSdpDense:
    def test_no_data_gives_full_range(self):
        obj = OperatorPoly.from_string(from_label("Z1", 1))
        lo, hi = oracle.exact_sdp_dense(obj)
        assert lo == pytest.approx(-1.0, abs=1e-6)
        assert hi == pytest.approx(1.0, abs=1e-6)

    def test_band_pins_range(self):
        obj = OperatorPoly.from_string(from_label("Z1", 1))
        iv = IntervalConstraint(((from_label("Z1", 1), 1.0),), 0.25, 0.35)
        lo, hi = oracle.exact_sdp_dense(obj, intervals=[iv])
        assert lo == pytest.approx(0.25, abs=1e-6)
        assert hi == pytest.approx(0.35, abs=1e-6)

    def test_multiword_band(self):
        obj = OperatorPoly.from_string(from_label("X1", 1))
        iv = IntervalConstraint(
            ((from_label("X1", 1), 1.0), (from_label("Z1", 1), 1.0)), 1.2, 1.2
        )
        lo, hi = oracle.exact_sdp_dense(obj, intervals=[iv])
        # on the Bloch ball x + z = 1.2 allows x in [0.2787.., 0.9213..]
        want = (1.2 + np.sqrt(2 * 1.0 - 1.2**2)) / 2
        assert hi == pytest.approx(want, abs=1e-5)
        assert lo == pytest.approx(1.2 - want, abs=1e-5)

    def test_size_cap(self):
        obj = OperatorPoly.from_string(from_label("Z1", 5))
        with pytest.raises(ValueError):
            oracle.exact_sdp_dense(obj)
