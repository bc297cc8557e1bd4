import math

import numpy as np
import pytest

from momentbound import models, oracle
from momentbound.models import BathSpec, LindbladModel
from momentbound.pauli import OperatorPoly, from_label, from_letters


def bath_pair():
    return (
        BathSpec(temperature=1.0, rate=0.001),
        BathSpec(temperature=0.1, rate=0.011),
    )


def test_grid_edges():
    assert sorted(models.grid_edges(1, 2)) == [(0, 1)]
    # 2x3 grid: 4 horizontal + 3 vertical bonds
    assert len(models.grid_edges(2, 3)) == 7
    assert len(models.grid_edges(3, 3)) == 12


def test_tfi_terms_and_signs():
    # H = g * sum Z_i + (J/2) * sum_<ij> X_i X_j on the open grid
    h = models.build_tfi_2d(2, 3, g=0.7, J=1.3)
    fields = [(p, c) for p, c in h.items() if p.weight == 1]
    bonds = [(p, c) for p, c in h.items() if p.weight == 2]
    assert len(fields) == 6 and len(bonds) == 7
    assert all(c == pytest.approx(0.7) for _, c in fields)
    assert all(c == pytest.approx(0.65) for _, c in bonds)
    assert all(p.letters().strip("I") == "Z" for p, _ in fields)
    assert all(p.letters().replace("I", "") == "XX" for p, _ in bonds)


def test_bose_occupation():
    b = BathSpec(temperature=1.0, rate=0.5, quantum=2.0)
    assert b.bose_occupation() == pytest.approx(1.0 / math.expm1(2.0))
    cold = BathSpec(temperature=1e-9, rate=0.5, quantum=2.0)
    assert cold.bose_occupation() == 0.0
    with pytest.raises(ValueError):
        BathSpec(temperature=1.0, rate=0.5).bose_occupation()


def test_bath_jump_rates_detailed_balance():
    b = BathSpec(temperature=1.0, rate=0.001, quantum=2.0)
    up, down = models.bath_jumps(2, 0, b, "hot")
    nb = b.bose_occupation()
    assert up.rate == pytest.approx(0.001 * nb)
    assert down.rate == pytest.approx(0.001 * (nb + 1))
    # rate ratio = Boltzmann factor at the bath temperature
    assert up.rate / down.rate == pytest.approx(math.exp(-2.0))


def test_boundary_driven_tags_and_quantum_resolution():
    hot, cold = bath_pair()
    m = models.build_boundary_driven(1, 2, g=1.0, J=1.0, hot=hot, cold=cold)
    assert m.n == 2
    assert set(m.bath_tags()) == {"hot", "cold"}
    # default bath quantum is the single-site splitting 2g
    up = [j for j in m.jumps if j.tag == "hot"][0]
    assert up.rate == pytest.approx(0.001 / math.expm1(2.0))


def test_adjoint_duality_against_dense():
    """tr(P . L(rho)) == tr(Ldag(P) . rho) for random rho and words P."""
    hot, cold = bath_pair()
    m = models.build_boundary_driven(1, 2, g=0.9, J=1.1, hot=hot, cold=cold)
    rng = np.random.default_rng(42)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    lrho = oracle.apply_lindblad_dense(m, rho)
    for label in ["Z1", "X2", "Y1 Z2", "X1 X2"]:
        p = from_label(label, 2)
        adj = models.adjoint_lindblad_apply(m, OperatorPoly.from_string(p))
        lhs = np.trace(oracle.string_to_dense(p) @ lrho)
        rhs = np.trace(oracle.poly_to_dense(adj) @ rho)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_heat_currents_balance_in_steady_state():
    hot, cold = bath_pair()
    m = models.build_boundary_driven(1, 2, g=1.0, J=1.0, hot=hot, cold=cold)
    j_hot = oracle.exact_heat_current(m, "hot")
    j_cold = oracle.exact_heat_current(m, "cold")
    assert j_hot > 0  # energy flows out of the hot bath
    assert j_hot + j_cold == pytest.approx(0.0, abs=1e-10)


def test_heat_current_poly_matches_dense():
    hot, cold = bath_pair()
    m = models.build_boundary_driven(1, 2, g=1.0, J=1.0, hot=hot, cold=cold)
    state = oracle.exact_steady_state(m)
    poly = models.heat_current_poly(m, "hot")
    assert poly.is_hermitian()
    assert state.expectation(poly) == pytest.approx(
        oracle.exact_heat_current(m, "hot"), abs=1e-10
    )


def test_majumdar_ghosh_dimer_energy():
    for n in (4, 6):
        h = models.build_majumdar_ghosh(n)
        e0, state = oracle.exact_ground_state(h)
        assert e0 == pytest.approx(-0.375 * n, abs=1e-9)
    # the two dimer coverings at n=6 are distinct ground states
    assert oracle.exact_ground_state(models.build_majumdar_ghosh(6))[1].degenerate


def test_majumdar_ghosh_raw_is_rescaled_variant():
    h = models.build_majumdar_ghosh(6)
    raw = models.build_majumdar_ghosh(6, raw=True)
    assert set(raw.strings()) == set(h.strings())
    for p, c in h.items():
        assert raw.coeff(p) == pytest.approx(4.0 * c)
    with pytest.raises(ValueError):
        models.build_majumdar_ghosh(5)


def test_lindblad_model_validation():
    z = OperatorPoly.from_string(from_letters("Z"))
    with pytest.raises(ValueError):
        LindbladModel(2, z)  # qubit-count mismatch
    with pytest.raises(ValueError):
        models.Jump(-0.1, z, "hot")
    bad = OperatorPoly.from_string(from_letters("X"), 1j)
    with pytest.raises(ValueError):
        LindbladModel(1, bad)  # non-Hermitian Hamiltonian
