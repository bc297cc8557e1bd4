"""Dense exact references for everything the relaxation machinery estimates.

Everything here works on explicit 2^n-dimensional matrices, built by
Kronecker products straight from single-site letters, so it shares no
arithmetic with the symplectic string algebra.  Intended for small n:
these are the oracles the test suite (and the `oracle` CLI subcommand)
compares bounds against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .models import LindbladModel
from .pauli import OperatorPoly, PauliString

__all__ = [
    "string_to_dense",
    "poly_to_dense",
    "DenseState",
    "exact_ground_state",
    "liouvillian_matrix",
    "apply_lindblad_dense",
    "exact_steady_state",
    "exact_heat_current",
    "partial_trace",
    "truncated_purity",
]

_DENSE_LETTERS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def string_to_dense(p: PauliString) -> np.ndarray:
    """2^n x 2^n matrix of a Pauli word; site 0 is the leftmost factor."""
    out = _DENSE_LETTERS[p.letter(0)]
    for j in range(1, p.n):
        out = np.kron(out, _DENSE_LETTERS[p.letter(j)])
    return out


def poly_to_dense(op: OperatorPoly) -> np.ndarray:
    out = np.zeros((2**op.n, 2**op.n), dtype=complex)
    for p, c in op.items():
        out += c * string_to_dense(p)
    return out


@dataclass
class DenseState:
    """Density matrix plus bookkeeping from the solve that produced it."""

    rho: np.ndarray
    n: int
    degenerate: bool = False
    min_eigval: float = 0.0

    def expectation(self, op: OperatorPoly | PauliString) -> float:
        dense = (
            string_to_dense(op) if isinstance(op, PauliString) else poly_to_dense(op)
        )
        val = np.trace(dense @ self.rho)
        if abs(val.imag) > 1e-8:
            raise ValueError(f"expectation has imaginary part {val.imag:.2e}")
        return float(val.real)

    def moments(self, strings: Sequence[PauliString]) -> np.ndarray:
        return np.array([self.expectation(p) for p in strings])

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    def check(self, tol: float = 1e-8) -> None:
        """Raise unless rho is Hermitian, unit trace and PSD within tol."""
        if np.abs(self.rho - self.rho.conj().T).max() > tol:
            raise ValueError("state is not Hermitian")
        if abs(np.trace(self.rho) - 1.0) > tol:
            raise ValueError(f"trace is {np.trace(self.rho)}")
        w = np.linalg.eigvalsh(self.rho)
        if w.min() < -tol:
            raise ValueError(f"negative eigenvalue {w.min():.2e}")


def exact_ground_state(h: OperatorPoly, gap_tol: float = 1e-10) -> tuple[float, DenseState]:
    """Ground energy and a ground state by dense diagonalisation."""
    hd = poly_to_dense(h)
    if np.abs(hd - hd.conj().T).max() > 1e-10:
        raise ValueError("Hamiltonian is not Hermitian")
    vals, vecs = scipy.linalg.eigh(hd)
    v = vecs[:, 0]
    rho = np.outer(v, v.conj())
    degenerate = len(vals) > 1 and vals[1] - vals[0] < gap_tol
    return float(vals[0]), DenseState(rho=rho, n=h.n, degenerate=degenerate)


# ---------------------------------------------------------------------------
# open-system references
#
# Row-major vectorisation throughout: vec(M) = M.reshape(-1), for which
# vec(A M B) = (A kron B^T) vec(M).


def liouvillian_matrix(model: LindbladModel) -> sp.csr_matrix:
    """Sparse matrix of L acting on row-major vectorised density matrices."""
    d = 2**model.n
    eye = sp.identity(d, dtype=complex, format="csr")
    h = sp.csr_matrix(poly_to_dense(model.hamiltonian))
    out = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    for jump in model.jumps:
        if jump.rate == 0.0:
            continue
        a = sp.csr_matrix(poly_to_dense(jump.op))
        ada = (a.conj().T @ a).tocsr()
        out = out + jump.rate * (
            sp.kron(a, a.conj())
            - 0.5 * (sp.kron(ada, eye) + sp.kron(eye, ada.T))
        )
    return out.tocsr()


def apply_lindblad_dense(model: LindbladModel, rho: np.ndarray) -> np.ndarray:
    """L(rho) evaluated directly on a dense matrix."""
    h = poly_to_dense(model.hamiltonian)
    out = -1j * (h @ rho - rho @ h)
    for jump in model.jumps:
        if jump.rate == 0.0:
            continue
        a = poly_to_dense(jump.op)
        ada = a.conj().T @ a
        out = out + jump.rate * (
            a @ rho @ a.conj().T - 0.5 * (ada @ rho + rho @ ada)
        )
    return out


def exact_steady_state(model: LindbladModel, degeneracy_tol: float = 1e-8) -> DenseState:
    """Steady state of the Lindblad generator.

    Small systems (2^n <= 32) go through a dense SVD, which also yields a
    reliable degeneracy flag from the second-smallest singular value.
    Larger ones use shift-inverted sparse Arnoldi with k=2 so a second
    near-zero eigenvalue is still detected.
    """
    if not model.jumps:
        raise ValueError("model has no dissipation; steady state not unique")
    d = 2**model.n
    lmat = liouvillian_matrix(model)
    if d <= 32:
        u, s, vh = np.linalg.svd(lmat.toarray())
        scale = max(s[0], 1.0)
        degenerate = s[-2] < degeneracy_tol * scale
        vec = vh[-1].conj()
    else:
        vals, vecs = spla.eigs(lmat.tocsc(), k=2, sigma=1e-9, which="LM")
        order = np.argsort(np.abs(vals))
        degenerate = np.abs(vals[order[1]]) < degeneracy_tol
        vec = vecs[:, order[0]]
    rho = vec.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise ValueError(
            "null vector is traceless; steady-state space is degenerate"
        )
    rho = rho / tr
    w = np.linalg.eigvalsh(rho)
    state = DenseState(
        rho=rho, n=model.n, degenerate=bool(degenerate), min_eigval=float(w.min())
    )
    residual = np.linalg.norm(apply_lindblad_dense(model, rho))
    if residual > 1e-9:
        raise ValueError(f"steady-state residual too large: {residual:.2e}")
    return state


def exact_heat_current(model: LindbladModel, tag: str = "hot") -> float:
    """tr(H * D_tag(rho_ss)) computed densely end to end."""
    state = exact_steady_state(model)
    h = poly_to_dense(model.hamiltonian)
    out = np.zeros_like(state.rho)
    for jump in model.jumps:
        if jump.tag != tag or jump.rate == 0.0:
            continue
        a = poly_to_dense(jump.op)
        ada = a.conj().T @ a
        out = out + jump.rate * (
            a @ state.rho @ a.conj().T - 0.5 * (ada @ state.rho + state.rho @ ada)
        )
    val = np.trace(h @ out)
    return float(val.real)


# ---------------------------------------------------------------------------
# reduced states & purity


def partial_trace(state: DenseState, keep: Sequence[int]) -> DenseState:
    """Reduced state on the (ordered) site subset ``keep``."""
    keep = list(keep)
    if len(set(keep)) != len(keep) or not all(0 <= s < state.n for s in keep):
        raise ValueError(f"bad site subset {keep} for n={state.n}")
    drop = [s for s in range(state.n) if s not in keep]
    perm = keep + drop
    t = state.rho.reshape((2,) * (2 * state.n))
    t = np.transpose(t, axes=perm + [state.n + p for p in perm])
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    t = t.reshape(dk, dd, dk, dd)
    return DenseState(rho=np.einsum("abcb->ac", t), n=len(keep))


def truncated_purity(n: int, moments: Iterable[float]) -> float:
    """(1/2^n) * sum of squared moments over an index set that includes
    the identity; equals tr(rho^2) when the set is all 4^n words."""
    return float(sum(m * m for m in moments)) / 2**n


def exact_sdp_dense(
    objective: OperatorPoly,
    intervals: Sequence = (),
    guarantees: Sequence = (),
    solver: str = "CLARABEL",
) -> tuple[float, float]:
    """Both optima of <objective> over *states* (not relaxations):
    rho >= 0, tr rho = 1, plus measurement bands and linear guarantees.

    Bands and guarantees are (coeffs, lower, upper) objects as produced
    by the confidence module: sum_j c_j tr(P_j rho) in [lower, upper].
    Any moment-matrix bound on the same data must contain this interval.
    """
    import cvxpy as cp

    n = objective.n
    if n > 4:
        raise ValueError(f"dense SDP oracle is capped at 4 qubits, got n={n}")
    d = 2**n
    rho = cp.Variable((d, d), hermitian=True)
    cons = [rho >> 0, cp.trace(rho) == 1]
    for item in list(intervals) + list(guarantees):
        expr = 0
        for p, c in item.coeffs:
            expr = expr + c * cp.real(cp.trace(string_to_dense(p) @ rho))
        if item.lower == item.upper:
            cons.append(expr == item.lower)
        else:
            cons.append(expr >= item.lower)
            cons.append(expr <= item.upper)
    obj = cp.real(cp.trace(poly_to_dense(objective) @ rho))
    out = []
    for sense in (cp.Minimize, cp.Maximize):
        prob = cp.Problem(sense(obj), cons)
        try:
            prob.solve(solver=solver)
            status = prob.status
        except cp.error.SolverError:
            status = "solver_error"
        if status not in ("optimal", "optimal_inaccurate") and solver != "SCS":
            # interior-point solvers choke on badly scaled equality rows
            # (dissipator rates span several decades); SCS does not
            prob.solve(solver="SCS", eps_abs=1e-9, eps_rel=1e-9)
            status = prob.status
        if status not in ("optimal", "optimal_inaccurate"):
            raise ValueError(f"dense SDP terminated with status {status!r}")
        out.append(float(prob.value))
    return out[0], out[1]
