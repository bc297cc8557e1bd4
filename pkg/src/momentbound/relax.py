"""Moment-relaxation compiler.

Moments <P_alpha> = tr(rho P_alpha) are the scalar unknowns of every
bound computed by this package.  This module owns the bookkeeping
between Pauli words and variable indices (the registry, with its
objective / positivity / measured / guarantee index sets), and compiles
the symbolic ingredients of the relaxation:

* moment matrices M[r,c] = <P_r P_c> = i^k <P_gamma>, stored as exact
  (phase, index) tables and, equivalently, as the affine decomposition
  M = B + sum_alpha A_alpha <P_alpha>;
* reduced-density-matrix blocks rho_A = (1/d_A) sum <sigma> sigma;
* steady-state constraints <L^dag(P)> = 0, generated breadth-first from
  seed words up to a budget;
* user-declared symmetry / linear-guarantee rows;
* moment-basis selection by occurrence frequency.

Everything here is symbolic and exact; numbers only appear once the sdp
module lowers the compiled pieces to a conic program.
"""

from __future__ import annotations

import json
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .models import LindbladModel, adjoint_lindblad_apply
from .pauli import (
    OperatorPoly,
    PauliString,
    Phase,
    PhasedString,
    identity,
    multiply,
)

__all__ = [
    "ROLE_OBJECTIVE",
    "ROLE_PSD",
    "ROLE_MEASURED",
    "ROLE_GUARANTEE",
    "MomentRegistry",
    "MomentMatrixSpec",
    "LinearMomentConstraint",
    "build_moment_matrix",
    "build_rdm_block",
    "generate_steady_constraints",
    "add_symmetry_constraint",
    "add_linear_guarantee",
    "register_objective",
    "objective_row",
    "select_moment_basis",
    "registration_order",
    "embed_local",
]

# Table-of-index-sets roles: objective I_o, positivity-block products I_+,
# measured I_M, linear guarantees (steady/symmetry) I_S; I_v is the union.
ROLE_OBJECTIVE = "objective"
ROLE_PSD = "psd"
ROLE_MEASURED = "measured"
ROLE_GUARANTEE = "guarantee"

_ROLES = (ROLE_OBJECTIVE, ROLE_PSD, ROLE_MEASURED, ROLE_GUARANTEE)


class MomentRegistry:
    """Bijection between Pauli words and variable indices.

    Index 0 is always the identity, which is never a free variable (the
    sdp module substitutes the constant 1).  Registration order is
    stable and meaningful: "first generated" selections read it.
    ``counts`` tracks how many coefficient lists (constraints, objective,
    measurement records, positivity-block entries) mention each word,
    which drives `select_moment_basis`.
    """

    def __init__(self, n: int):
        self.n = n
        self._strings: list[PauliString] = [identity(n)]
        self._index: dict[PauliString, int] = {self._strings[0]: 0}
        self._roles: list[set[str]] = [set()]
        self._counts: list[int] = [0]
        self._frozen = False

    # -- registration ---------------------------------------------------

    def register(
        self, p: PauliString, role: str | None = None, count: bool = False
    ) -> int:
        if p.n != self.n:
            raise ValueError(f"string on {p.n} qubits, registry has {self.n}")
        if role is not None and role not in _ROLES:
            raise ValueError(f"unknown role {role!r}")
        idx = self._index.get(p)
        if idx is None:
            if self._frozen:
                raise ValueError(f"registry frozen; cannot add {p.label()}")
            idx = len(self._strings)
            self._strings.append(p)
            self._index[p] = idx
            self._roles.append(set())
            self._counts.append(0)
        if idx == 0:
            return idx  # the identity belongs to no index set
        if role is not None:
            if self._frozen and role not in self._roles[idx]:
                raise ValueError("registry frozen; cannot extend index sets")
            self._roles[idx].add(role)
        if count:
            if self._frozen:
                raise ValueError("registry frozen; cannot bump counts")
            self._counts[idx] += 1
        return idx

    def freeze(self) -> None:
        orphans = [
            self._strings[i].label()
            for i in range(1, len(self._strings))
            if not self._roles[i]
        ]
        if orphans:
            raise ValueError(f"registered strings in no index set: {orphans[:5]}")
        self._frozen = True

    @property
    def frozen(self) -> bool:
        return self._frozen

    # -- lookup -----------------------------------------------------------

    def index_of(self, p: PauliString) -> int:
        try:
            return self._index[p]
        except KeyError:
            raise ValueError(f"unregistered string {p.label()}") from None

    def contains(self, p: PauliString) -> bool:
        return p in self._index

    def string_at(self, idx: int) -> PauliString:
        return self._strings[idx]

    def __len__(self) -> int:
        return len(self._strings)

    def roles_of(self, idx: int) -> frozenset[str]:
        return frozenset(self._roles[idx])

    def count_of(self, idx: int) -> int:
        return self._counts[idx]

    def indices_with_role(self, role: str) -> list[int]:
        return [i for i in range(1, len(self._strings)) if role in self._roles[i]]

    def all_strings(self) -> list[PauliString]:
        return list(self._strings)

    def summary(self) -> dict:
        sizes = {role: len(self.indices_with_role(role)) for role in _ROLES}
        return {"n": self.n, "variables": len(self._strings) - 1, **sizes}

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "strings": [
                {
                    "index": i,
                    "label": p.label(),
                    "roles": sorted(self._roles[i]),
                    "count": self._counts[i],
                }
                for i, p in enumerate(self._strings)
            ],
        }

    def dump_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)


# ---------------------------------------------------------------------------
# positivity blocks


@dataclass
class MomentMatrixSpec:
    """A Hermitian block that is PSD for the moments of any state.

    ``affine`` lists upper-triangle entries (r, c, coeff, index) meaning
    block[r, c] += coeff * <P_index> (the (c, r) conjugate is implied).
    For product (``kind == "moment"``) blocks the exact symbolic tables
    phase_k / var_idx cover the full square.
    """

    dim: int
    generators: list[PauliString]
    registry: MomentRegistry
    kind: str  # "moment" | "rdm"
    label: str
    affine: list[tuple[int, int, complex, int]]
    phase_k: np.ndarray | None = None
    var_idx: np.ndarray | None = None

    def entry(self, r: int, c: int) -> PhasedString:
        """Symbolic entry i^k <P> of a product-form block."""
        if self.phase_k is None:
            raise ValueError("symbolic entries exist only for moment matrices")
        return PhasedString(
            Phase(int(self.phase_k[r, c])),
            self.registry.string_at(int(self.var_idx[r, c])),
        )

    def constant_matrix(self) -> np.ndarray:
        """B: the part of the block multiplying the constant moment 1."""
        return self.coefficient_matrix(identity(self.registry.n))

    def coefficient_matrix(self, p: PauliString) -> np.ndarray:
        """A_alpha: the coefficient matrix of <P_alpha> in the block."""
        idx = self.registry.index_of(p)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for r, c, coeff, i in self.affine:
            if i != idx:
                continue
            out[r, c] += coeff
            if r != c:
                out[c, r] += np.conj(coeff)
        return out

    def plus_strings(self) -> list[PauliString]:
        """Distinct non-identity strings in first-appearance (row-major
        upper-triangle scan) order — the alpha-numbering of the A_alpha."""
        seen: dict[int, None] = {}
        for _, _, _, i in self.affine:
            if i != 0:
                seen.setdefault(i)
        return [self.registry.string_at(i) for i in seen]

    def evaluate(self, moments: Mapping[PauliString, float]) -> np.ndarray:
        """Numeric block at given moment values (identity implied = 1)."""
        vals = {0: 1.0}
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for r, c, coeff, i in self.affine:
            v = vals.get(i)
            if v is None:
                v = vals[i] = float(moments[self.registry.string_at(i)])
            out[r, c] += coeff * v
            if r != c:
                out[c, r] += np.conj(coeff) * v
        return out


def build_moment_matrix(
    basis: Sequence[PauliString], registry: MomentRegistry, label: str = "M"
) -> MomentMatrixSpec:
    """Symbolic moment matrix M[r,c] = <P_r P_c> on the given basis.

    All product strings are registered into the positivity set (one
    occurrence counted per upper-triangle entry); the builder verifies
    that the symbolic matrix is Hermitian, i.e. the (c, r) product is
    the exact conjugate of the (r, c) one.
    """
    m = len(basis)
    if m == 0:
        raise ValueError("empty basis")
    if len(set(basis)) != m:
        raise ValueError("duplicate basis strings")
    phase_k = np.zeros((m, m), dtype=np.int8)
    var_idx = np.zeros((m, m), dtype=np.int32)
    affine: list[tuple[int, int, complex, int]] = []
    for r in range(m):
        for c in range(r, m):
            ps = multiply(basis[r], basis[c])
            back = multiply(basis[c], basis[r])
            if back.string != ps.string or back.phase.k != (-ps.phase.k) % 4:
                raise AssertionError("product matrix is not Hermitian")
            if r == c and (not ps.string.is_identity or ps.phase.k != 0):
                raise AssertionError("diagonal entry is not the identity")
            idx = registry.register(ps.string, role=ROLE_PSD, count=True)
            phase_k[r, c] = ps.phase.k
            var_idx[r, c] = idx
            phase_k[c, r] = back.phase.k
            var_idx[c, r] = idx
            affine.append((r, c, ps.phase.value, idx))
    return MomentMatrixSpec(
        dim=m,
        generators=list(basis),
        registry=registry,
        kind="moment",
        label=label,
        affine=affine,
        phase_k=phase_k,
        var_idx=var_idx,
    )


_LOCAL_DENSE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def embed_local(local: PauliString, sites: Sequence[int], n: int) -> PauliString:
    """Place a |sites|-qubit word onto the given global sites of n qubits."""
    if len(set(sites)) != len(sites):
        raise ValueError(f"repeated site in {tuple(sites)}")
    if any(not 0 <= s < n for s in sites):
        raise ValueError(f"site out of range for n={n}: {tuple(sites)}")
    x = z = 0
    for j, site in enumerate(sites):
        x |= ((local.x >> j) & 1) << site
        z |= ((local.z >> j) & 1) << site
    return PauliString(n, x, z)


def build_rdm_block(
    sites: Sequence[int],
    registry: MomentRegistry,
    max_sites: int = 3,
    label: str | None = None,
) -> MomentMatrixSpec:
    """Reduced-density-matrix block on a site subset:
    rho_A = (1/d_A) sum_alpha <sigma_alpha> sigma_alpha, d_A = 2^|sites|.

    Registers all 4^|sites| embedded local words.
    """
    from .pauli import all_strings

    sites = list(sites)
    k = len(sites)
    if k < 1 or len(set(sites)) != k or not all(0 <= s < registry.n for s in sites):
        raise ValueError(f"bad site subset {sites} for n={registry.n}")
    if k > max_sites:
        raise ValueError(f"RDM subset of {k} sites exceeds the cap of {max_sites}")
    d = 2**k
    affine: list[tuple[int, int, complex, int]] = []
    generators: list[PauliString] = []
    for local in all_strings(k):
        dense = _LOCAL_DENSE[local.letter(0)]
        for j in range(1, k):
            dense = np.kron(dense, _LOCAL_DENSE[local.letter(j)])
        embedded = embed_local(local, sites, registry.n)
        generators.append(embedded)
        idx = registry.register(embedded, role=ROLE_PSD, count=True)
        for r in range(d):
            for c in range(r, d):
                if dense[r, c] != 0:
                    affine.append((r, c, dense[r, c] / d, idx))
    return MomentMatrixSpec(
        dim=d,
        generators=generators,
        registry=registry,
        kind="rdm",
        label=label or f"rdm{tuple(s + 1 for s in sites)}",
        affine=affine,
    )


# ---------------------------------------------------------------------------
# linear constraints


@dataclass(frozen=True)
class LinearMomentConstraint:
    """sum_i coeffs[i] * <P_i>  (relation)  rhs, with i a registry index."""

    coeffs: tuple[tuple[int, float], ...]
    rhs: float
    relation: str  # "=", "<=", ">="

    def __post_init__(self) -> None:
        if self.relation not in ("=", "<=", ">="):
            raise ValueError(f"bad relation {self.relation!r}")
        if not any(c != 0.0 for _, c in self.coeffs):
            raise ValueError("constraint has no nonzero coefficient")

    def residual(self, moments: Mapping[int, float]) -> float:
        return sum(c * moments[i] for i, c in self.coeffs) - self.rhs


def _poly_row(
    poly: OperatorPoly, registry: MomentRegistry, role: str, count: bool
) -> tuple[float, dict[int, float]]:
    """Split a Hermitian poly into (identity constant, index -> coeff)."""
    const = 0.0
    row: dict[int, float] = {}
    for p, c in poly.real_coeffs(tol=1e-9).items():
        if p.is_identity:
            const += c
        else:
            idx = registry.register(p, role=role, count=count)
            row[idx] = row.get(idx, 0.0) + c
    return const, row


def generate_steady_constraints(
    model: LindbladModel,
    seeds: Sequence[PauliString],
    budget: int,
    registry: MomentRegistry,
) -> list[LinearMomentConstraint]:
    """Breadth-first <L^dag(P)> = 0 rows, at most ``budget`` of them.

    Each dequeued word P contributes one real equality (its adjoint image
    is Hermitian); the words appearing in the image are registered in
    canonical within-image order and enqueued if new, so the generation
    order — and hence any "first K generated" selection — is a pure
    function of (model, seeds, budget).
    """
    if budget < 1:
        raise ValueError(f"constraint budget must be >= 1, got {budget}")
    if not seeds:
        raise ValueError("seed strings required (typically the objective's)")
    queue: deque[PauliString] = deque()
    seen: set[PauliString] = set()
    for p in seeds:
        if p not in seen and not p.is_identity:
            queue.append(p)
            seen.add(p)
    out: list[LinearMomentConstraint] = []
    while queue and len(out) < budget:
        p = queue.popleft()
        image = adjoint_lindblad_apply(model, p)
        const, row = _poly_row(image, registry, ROLE_GUARANTEE, count=True)
        for q in image.strings():
            if not q.is_identity and q not in seen:
                seen.add(q)
                queue.append(q)
        if not row:
            continue
        out.append(
            LinearMomentConstraint(
                coeffs=tuple(sorted(row.items())), rhs=-const, relation="="
            )
        )
    return out


def add_symmetry_constraint(
    expr: OperatorPoly, registry: MomentRegistry
) -> LinearMomentConstraint:
    """User-declared equality sum coeff * <P> = 0 (identity part moves to
    the right-hand side)."""
    if not expr.is_hermitian(tol=1e-9):
        raise ValueError("symmetry expression must be Hermitian")
    const, row = _poly_row(expr, registry, ROLE_GUARANTEE, count=True)
    return LinearMomentConstraint(
        coeffs=tuple(sorted(row.items())), rhs=-const, relation="="
    )


def add_linear_guarantee(
    expr: OperatorPoly, lower: float, upper: float, registry: MomentRegistry
) -> list[LinearMomentConstraint]:
    """Two-sided guarantee lower <= <expr> <= upper (e.g. an energy shell),
    emitted as one or two rows."""
    if lower > upper:
        raise ValueError(f"empty guarantee [{lower}, {upper}]")
    if not expr.is_hermitian(tol=1e-9):
        raise ValueError("guarantee expression must be Hermitian")
    const, row = _poly_row(expr, registry, ROLE_GUARANTEE, count=True)
    coeffs = tuple(sorted(row.items()))
    if lower == upper:
        return [LinearMomentConstraint(coeffs=coeffs, rhs=lower - const, relation="=")]
    return [
        LinearMomentConstraint(coeffs=coeffs, rhs=lower - const, relation=">="),
        LinearMomentConstraint(coeffs=coeffs, rhs=upper - const, relation="<="),
    ]


def register_objective(objective: OperatorPoly, registry: MomentRegistry) -> None:
    """Put the objective's strings into the objective index set."""
    _poly_row(objective, registry, ROLE_OBJECTIVE, count=True)


def objective_row(
    objective: OperatorPoly, registry: MomentRegistry
) -> tuple[float, dict[int, float]]:
    """(constant, index -> coefficient) for an already-registered objective."""
    const = 0.0
    row: dict[int, float] = {}
    for p, c in objective.real_coeffs(tol=1e-9).items():
        if p.is_identity:
            const += c
        else:
            idx = registry.index_of(p)
            row[idx] = row.get(idx, 0.0) + c
    return const, row


# ---------------------------------------------------------------------------
# basis / pool selection


def select_moment_basis(registry: MomentRegistry, size: int) -> list[PauliString]:
    """Identity plus the size-1 most frequently used strings (occurrence
    count across constraint/objective/measurement lists; ties broken by
    canonical order).  Asking for more strings than exist returns all of
    them with a warning."""
    if size < 1:
        raise ValueError(f"basis size must be >= 1, got {size}")
    if size > len(registry):
        warnings.warn(
            f"basis size {size} exceeds the {len(registry)} registered "
            "strings; returning all of them",
            stacklevel=2,
        )
        size = len(registry)
    ranked = sorted(
        range(1, len(registry)),
        key=lambda i: (-registry.count_of(i), registry.string_at(i).sort_key()),
    )
    return [registry.string_at(0)] + [
        registry.string_at(i) for i in ranked[: size - 1]
    ]


def registration_order(
    registry: MomentRegistry,
    k: int | None = None,
    letters: str | None = None,
) -> list[PauliString]:
    """Non-identity strings in first-registered order, optionally keeping
    only words whose letters all lie in ``letters`` (e.g. "XY"), and
    optionally truncated to the first k."""
    allowed = set(letters.upper()) if letters else None
    out = []
    for i in range(1, len(registry)):
        p = registry.string_at(i)
        if allowed is not None:
            word = {p.letter(j) for j in range(p.n)} - {"I"}
            if not word <= allowed:
                continue
        out.append(p)
        if k is not None and len(out) == k:
            break
    return out
