"""Spin-lattice Hamiltonians and boundary-driven open-system models.

Three model families:

* transverse-field Ising on an open rows x cols grid,
      H = g * sum_i Z_i + (J/2) * sum_<ij> X_i X_j,
* the same grid driven out of equilibrium by thermal baths attached to
  the leftmost (hot) and rightmost (cold) columns, with local
  raising/lowering jumps at detailed-balance rates,
* the Majumdar-Ghosh chain in spin-1/2 normalisation (S = sigma/2),
  whose dimerised ground state has energy -3/8 per site.

Dissipative dynamics only ever appears in adjoint (Heisenberg) form:
the generator acts on observables and stays inside the Pauli polynomial
algebra, so nothing 2^n-dimensional is built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .pauli import (
    OperatorPoly,
    PauliString,
    anticommutator,
    commutator,
    from_label,
    single_site,
)

__all__ = [
    "BathSpec",
    "Jump",
    "LindbladModel",
    "grid_edges",
    "build_tfi_2d",
    "sigma_plus",
    "sigma_minus",
    "bath_jumps",
    "build_boundary_driven",
    "adjoint_dissipator",
    "adjoint_lindblad_apply",
    "heat_current_poly",
    "build_majumdar_ghosh",
]

# exp(-x) is below double-precision noise past this; avoids expm1 overflow
_EXP_CUTOFF = 700.0


@dataclass(frozen=True)
class BathSpec:
    """Thermal bath: temperature T, bare coupling rate, and the energy
    quantum exchanged per jump.

    ``quantum=None`` means "resolve to the single-site splitting of the
    attached Hamiltonian" (2*|g| for the transverse-field grid), which is
    this package's documented default for the otherwise unspecified bath
    energy scale.
    """

    temperature: float
    rate: float
    quantum: float | None = None

    def __post_init__(self) -> None:
        if self.temperature <= 0:
            raise ValueError(f"bath temperature must be > 0, got {self.temperature}")
        if self.rate < 0:
            raise ValueError(f"bath rate must be >= 0, got {self.rate}")
        if self.quantum is not None and self.quantum <= 0:
            raise ValueError(f"bath quantum must be > 0, got {self.quantum}")

    def bose_occupation(self) -> float:
        """n_B = 1 / (exp(quantum / T) - 1); tends to 0 as T -> 0+."""
        if self.quantum is None:
            raise ValueError("bath quantum not resolved yet")
        x = self.quantum / self.temperature
        if x > _EXP_CUTOFF:
            return 0.0
        return 1.0 / math.expm1(x)

    def resolved(self, default_quantum: float) -> "BathSpec":
        if self.quantum is not None:
            return self
        if default_quantum <= 0:
            raise ValueError(
                "cannot default the bath quantum: single-site splitting is 0; "
                "set BathSpec.quantum explicitly"
            )
        return BathSpec(self.temperature, self.rate, default_quantum)


@dataclass(frozen=True)
class Jump:
    """One jump channel: rate * D[op], tagged by the bath it belongs to."""

    rate: float
    op: OperatorPoly
    tag: str

    def __post_init__(self) -> None:
        if self.rate < 0:
            raise ValueError(f"jump rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus a (possibly empty) set of jump channels."""

    n: int
    hamiltonian: OperatorPoly
    jumps: tuple[Jump, ...] = ()
    rows: int = 0
    cols: int = 0

    def __post_init__(self) -> None:
        if self.hamiltonian.n != self.n:
            raise ValueError("Hamiltonian qubit count does not match model")
        if not self.hamiltonian.is_hermitian():
            raise ValueError("Hamiltonian must be Hermitian")
        for j in self.jumps:
            if j.op.n != self.n:
                raise ValueError("jump operator qubit count does not match model")

    def bath_tags(self) -> tuple[str, ...]:
        seen: list[str] = []
        for j in self.jumps:
            if j.tag not in seen:
                seen.append(j.tag)
        return tuple(seen)


# ---------------------------------------------------------------------------
# lattice Hamiltonians


def grid_edges(rows: int, cols: int) -> list[tuple[int, int]]:
    """Nearest-neighbour edges of an open rows x cols grid, sites numbered
    row-major (site = r*cols + c)."""
    if rows < 1 or cols < 1:
        raise ValueError(f"grid must be at least 1x1, got {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            s = r * cols + c
            if c + 1 < cols:
                edges.append((s, s + 1))
            if r + 1 < rows:
                edges.append((s, s + cols))
    return edges


def _two_site(n: int, i: int, j: int, letter: str) -> PauliString:
    return from_label(f"{letter}{i + 1} {letter}{j + 1}", n)


def build_tfi_2d(rows: int, cols: int, g: float, J: float) -> OperatorPoly:
    """Transverse-field Ising grid, open boundaries:
    H = g * sum_i Z_i + (J/2) * sum_<ij> X_i X_j."""
    n = rows * cols
    terms: list[tuple[PauliString, complex]] = []
    for i in range(n):
        terms.append((single_site(n, i, "Z"), g))
    for i, j in grid_edges(rows, cols):
        terms.append((_two_site(n, i, j, "X"), 0.5 * J))
    return OperatorPoly(n, terms)


# ---------------------------------------------------------------------------
# baths


def sigma_plus(n: int, site: int) -> OperatorPoly:
    """(X + iY)/2 on ``site``: raises into the Z = +1 state."""
    return OperatorPoly(
        n, [(single_site(n, site, "X"), 0.5), (single_site(n, site, "Y"), 0.5j)]
    )


def sigma_minus(n: int, site: int) -> OperatorPoly:
    """(X - iY)/2 on ``site``: decays into the Z = -1 state."""
    return OperatorPoly(
        n, [(single_site(n, site, "X"), 0.5), (single_site(n, site, "Y"), -0.5j)]
    )


def bath_jumps(n: int, site: int, bath: BathSpec, tag: str) -> tuple[Jump, Jump]:
    """The jump-channel pair a thermal bath induces on one site:
    absorption sigma_plus at rate*n_B, emission sigma_minus at
    rate*(n_B + 1) — detailed balance at the bath temperature."""
    nb = bath.bose_occupation()
    return (
        Jump(bath.rate * nb, sigma_plus(n, site), tag),
        Jump(bath.rate * (nb + 1.0), sigma_minus(n, site), tag),
    )


def build_boundary_driven(
    rows: int,
    cols: int,
    g: float,
    J: float,
    hot: BathSpec,
    cold: BathSpec,
) -> LindbladModel:
    """Transverse-field grid with a hot bath on every leftmost-column site
    and a cold bath on every rightmost-column site; interior sites are
    undriven.  Bath quanta default to 2*|g|, the single-site splitting.
    """
    if cols < 2:
        raise ValueError(
            f"boundary driving needs cols >= 2 so the hot and cold columns "
            f"differ, got cols={cols}"
        )
    n = rows * cols
    h = build_tfi_2d(rows, cols, g, J)
    quantum = 2.0 * abs(g)
    hot = hot.resolved(quantum)
    cold = cold.resolved(quantum)
    jumps: tuple[Jump, ...] = ()
    for r in range(rows):
        jumps += bath_jumps(n, r * cols, hot, "hot")
        jumps += bath_jumps(n, r * cols + cols - 1, cold, "cold")
    return LindbladModel(n=n, hamiltonian=h, jumps=jumps, rows=rows, cols=cols)


# ---------------------------------------------------------------------------
# adjoint (Heisenberg-picture) generator


def adjoint_dissipator(jump: Jump, op: OperatorPoly) -> OperatorPoly:
    """rate * (A^dag op A - {A^dag A, op}/2) for one jump channel."""
    a = jump.op
    ad = a.dagger()
    ada = ad @ a
    return jump.rate * ((ad @ op @ a) - 0.5 * anticommutator(ada, op))


def adjoint_lindblad_apply(
    model: LindbladModel, op: OperatorPoly | PauliString
) -> OperatorPoly:
    """Heisenberg generator L^dag(op) = i[H, op] + sum_k rate_k D^dag_k(op).

    tr(op * L(rho)) = tr(L^dag(op) * rho) for every state, so each Pauli
    word P yields the steady-state constraint <L^dag(P)> = 0, a linear
    relation among moments.  The image of a Hermitian op is Hermitian.
    """
    if isinstance(op, PauliString):
        op = OperatorPoly.from_string(op)
    if op.n != model.n:
        raise ValueError(f"operator on {op.n} qubits, model has {model.n}")
    out = 1j * commutator(model.hamiltonian, op)
    for jump in model.jumps:
        if jump.rate == 0.0:
            continue
        out = out + adjoint_dissipator(jump, op)
    return out


def heat_current_poly(model: LindbladModel, tag: str = "hot") -> OperatorPoly:
    """Pauli expansion of the steady heat current out of bath ``tag``:
    <O> = tr(H * D_tag(rho)) = <sum_{k in tag} rate_k D^dag_k(H)>."""
    if tag not in model.bath_tags():
        raise ValueError(
            f"model has no bath tagged {tag!r}; available: {model.bath_tags()}"
        )
    out = OperatorPoly.zero(model.n)
    for jump in model.jumps:
        if jump.tag == tag and jump.rate != 0.0:
            out = out + adjoint_dissipator(jump, model.hamiltonian)
    return out


# ---------------------------------------------------------------------------
# Majumdar-Ghosh chain


def build_majumdar_ghosh(n: int, raw: bool = False) -> OperatorPoly:
    """Majumdar-Ghosh chain of n spins (n even, periodic):

        H = 1/4 * sum_j [ (XX+YY+ZZ)_{j,j+1} + 1/2 (XX+YY+ZZ)_{j,j+2} ].

    The global 1/4 is the spin-1/2 normalisation (S = sigma/2) that puts
    the dimer ground energy at exactly -0.375 per site; ``raw=True``
    drops it and returns the bare-Pauli sum (-1.5 per site).  Periodic
    next-nearest pairs merge into a single term at n = 4.
    """
    if n < 4 or n % 2:
        raise ValueError(f"chain length must be even and >= 4, got n={n}")
    scale = 1.0 if raw else 0.25
    acc: dict[PauliString, complex] = {}
    for i in range(n):
        for step, w in ((1, scale), (2, 0.5 * scale)):
            j = (i + step) % n
            a, b = min(i, j), max(i, j)
            for letter in "XYZ":
                p = _two_site(n, a, b, letter)
                acc[p] = acc.get(p, 0.0) + w
    return OperatorPoly(n, acc)
