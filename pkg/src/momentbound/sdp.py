"""Lowering compiled relaxations to conic programs and solving them.

The pipeline is: `assemble` collects a registry, positivity blocks,
linear constraints and measurement intervals into a `ConicProblem`;
`compile_conic` lowers that (for one bound direction) into a
backend-neutral `ConicData` in which the identity moment is the
constant 1, exactly-pinned moments are substituted out, Hermitian
blocks are realified via M = S + iK -> [[S, -K], [K, S]], and the
truncated-purity objective becomes a second-order-cone epigraph;
`solve` hands the result to one of three interior-point / first-order
backends (clarabel, cvxopt's conelp, scs) and maps their exit states
onto a fixed status vocabulary.

Every reported bound is finally intersected with the closed-form
box bound (interval arithmetic over the per-moment boxes).  Both are
valid bounds on the same quantity, so taking the tighter one is free
and makes the Measure-only strategy exact rather than a solver call.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .confidence import IntervalConstraint
from .pauli import OperatorPoly, PauliString
from .relax import (
    ROLE_OBJECTIVE,
    LinearMomentConstraint,
    MomentMatrixSpec,
    MomentRegistry,
    objective_row,
)

__all__ = [
    "PuritySpec",
    "purity_objective",
    "ConicProblem",
    "ConicData",
    "BoundResult",
    "assemble",
    "compile_conic",
    "solve",
    "solve_both",
    "box_bound",
    "export_sdpa",
    "parse_sdpa",
    "SdpaProblem",
    "solve_sdpa_problem",
]

STATUSES = ("optimal", "near_optimal", "infeasible", "unbounded", "numerical_failure")

# relative duality-gap threshold separating "optimal" from "near_optimal"
_GAP_TOL = 1e-7


@dataclass(frozen=True)
class PuritySpec:
    """Truncated purity (1 + sum_i <P_i>^2) / d over the given registry
    indices; only a lower bound is meaningful (the square sum is convex)."""

    indices: tuple[int, ...]
    d: int

    def value_from_square_sum(self, t: float) -> float:
        return (1.0 + t) / self.d


def purity_objective(
    registry: MomentRegistry, strings: Sequence[PauliString]
) -> PuritySpec:
    """Register the words entering the truncated purity and return the spec."""
    idxs = []
    for p in strings:
        if p.is_identity:
            continue  # the identity contributes the leading 1/d
        idxs.append(registry.register(p, role=ROLE_OBJECTIVE, count=True))
    if not idxs:
        raise ValueError("purity objective needs at least one non-identity word")
    return PuritySpec(indices=tuple(dict.fromkeys(idxs)), d=2**registry.n)


@dataclass
class ConicProblem:
    """A bound-ready moment problem: objective + feasible set."""

    registry: MomentRegistry
    objective: OperatorPoly | PuritySpec
    blocks: list[MomentMatrixSpec]
    equalities: list[LinearMomentConstraint]
    inequalities: list[LinearMomentConstraint]
    boxes: np.ndarray  # (len(registry), 2) per-moment [lo, hi]; row 0 is [1, 1]
    confidence: float = 1.0

    @property
    def is_purity(self) -> bool:
        return isinstance(self.objective, PuritySpec)


def assemble(
    objective: OperatorPoly | PuritySpec,
    registry: MomentRegistry,
    moment_blocks: Sequence[MomentMatrixSpec] = (),
    constraints: Sequence[LinearMomentConstraint] = (),
    intervals: Sequence[IntervalConstraint] = (),
    confidence: float = 1.0,
) -> ConicProblem:
    """Collect the feasible set for one bound computation.

    Single-word intervals tighten the per-moment boxes (every moment
    starts in [-1, 1]); multi-word intervals become inequality rows.
    All words must already be registered -- an unknown word here means
    the caller measured or constrained something the relaxation never
    saw, which is a bug, not a request.
    """
    nv = len(registry)
    boxes = np.tile([-1.0, 1.0], (nv, 1))
    boxes[0] = (1.0, 1.0)
    eqs: list[LinearMomentConstraint] = []
    ineqs: list[LinearMomentConstraint] = []
    for con in constraints:
        for i, _ in con.coeffs:
            registry.string_at(i)  # IndexError on nonsense rows
        (eqs if con.relation == "=" else ineqs).append(con)

    for iv in intervals:
        idx_coeffs = [(registry.index_of(p), c) for p, c in iv.coeffs]
        if len(idx_coeffs) == 1 and idx_coeffs[0][1] == 1.0:
            i = idx_coeffs[0][0]
            boxes[i, 0] = max(boxes[i, 0], iv.lower)
            boxes[i, 1] = min(boxes[i, 1], iv.upper)
        else:
            coeffs = tuple(sorted(idx_coeffs))
            ineqs.append(
                LinearMomentConstraint(coeffs=coeffs, rhs=iv.upper, relation="<=")
            )
            ineqs.append(
                LinearMomentConstraint(coeffs=coeffs, rhs=iv.lower, relation=">=")
            )

    if isinstance(objective, PuritySpec):
        for i in objective.indices:
            registry.string_at(i)
    else:
        if objective.n != registry.n:
            raise ValueError("objective qubit count does not match registry")
        for p in objective.real_coeffs(tol=1e-9):
            if not p.is_identity:
                registry.index_of(p)
    if not 0.0 < confidence <= 1.0:
        raise ValueError(f"confidence must lie in (0, 1], got {confidence}")
    return ConicProblem(
        registry=registry,
        objective=objective,
        blocks=list(moment_blocks),
        equalities=eqs,
        inequalities=ineqs,
        boxes=boxes,
        confidence=confidence,
    )


# ---------------------------------------------------------------------------
# lowering


@dataclass
class _PsdData:
    dim: int  # embedded (real symmetric) side length = 2 * block dim
    const: list[tuple[int, int, float]]  # upper-triangle entries of T0
    cols: dict[int, list[tuple[int, int, float]]]  # conic var -> entries of Tv


@dataclass
class ConicData:
    """min c.x + const over eq rows, <= rows, SOC vectors and LMI blocks.

    Variables are the unpinned moments in registry order (plus, for a
    purity objective, one trailing epigraph variable t >= sum y^2).
    `infeasible` marks contradictions found during substitution, e.g.
    measurement boxes with empty intersection.
    """

    nvar: int
    var_index: list[int]  # conic position -> registry index (t -> -1)
    c: np.ndarray
    const: float
    eq_rows: list[tuple[dict[int, float], float]]
    le_rows: list[tuple[dict[int, float], float]]
    socs: list[list[tuple[dict[int, float], float]]]
    psd: list[_PsdData]
    infeasible: bool = False
    box_value: float = np.nan  # closed-form box bound on the same min problem


def _realify(
    r: int, c: int, coeff: complex, m: int
) -> list[tuple[int, int, float]]:
    """Upper-triangle entries of the 2m x 2m real embedding of a Hermitian
    contribution coeff at (r, c) (conjugate at (c, r) implied)."""
    a, b = float(np.real(coeff)), float(np.imag(coeff))
    out = []
    if r == c:
        if abs(b) > 1e-12:
            raise ValueError("non-real diagonal in a Hermitian block")
        out.append((r, r, a))
        out.append((m + r, m + r, a))
        return out
    if a != 0.0:
        out.append((r, c, a))
        out.append((m + r, m + c, a))
    if b != 0.0:
        out.append((r, m + c, -b))
        out.append((c, m + r, b))
    return out


def compile_conic(problem: ConicProblem, direction: str = "lower") -> ConicData:
    """Lower a ConicProblem to backend-neutral data for one direction.

    "lower" minimises the objective, "upper" minimises its negation
    (the caller flips the sign back).  Purity supports "lower" only.
    """
    if direction not in ("lower", "upper"):
        raise ValueError(f"direction must be 'lower' or 'upper', got {direction!r}")
    if problem.is_purity and direction == "upper":
        raise ValueError(
            "upper bounds on the truncated purity are not supported: the "
            "square sum is convex, so only its minimum is a valid bound"
        )
    reg = problem.registry
    boxes = problem.boxes
    infeasible = bool(np.any(boxes[:, 0] > boxes[:, 1] + 1e-15))

    pinned: dict[int, float] = {0: 1.0}
    for i in range(1, len(reg)):
        if boxes[i, 0] == boxes[i, 1]:
            pinned[i] = float(boxes[i, 0])
    var_index = [i for i in range(1, len(reg)) if i not in pinned]
    pos = {idx: k for k, idx in enumerate(var_index)}
    nvar = len(var_index)

    sign = -1.0 if direction == "upper" else 1.0
    const = 0.0
    c = np.zeros(nvar + (1 if problem.is_purity else 0))
    socs: list[list[tuple[dict[int, float], float]]] = []
    if problem.is_purity:
        spec: PuritySpec = problem.objective  # type: ignore[assignment]
        t = nvar  # trailing epigraph variable
        var_index = var_index + [-1]
        c[t] = 1.0
        # (1 + t, 2 y_1, ..., 2 y_k, 1 - t) in a second-order cone
        # encodes t >= sum y_i^2; pinned members fold into the constant.
        vec: list[tuple[dict[int, float], float]] = [({t: 1.0}, 1.0)]
        for i in spec.indices:
            if i in pinned:
                const += pinned[i] ** 2
            else:
                vec.append(({pos[i]: 2.0}, 0.0))
        vec.append(({t: -1.0}, 1.0))
        if len(vec) > 2:
            socs.append(vec)
        else:
            # everything pinned: t is only lower-bounded by 0
            socs = []
            c = np.zeros(nvar)
            var_index = var_index[:-1]
    else:
        obj_const, row = objective_row(problem.objective, reg)  # type: ignore[arg-type]
        const += sign * obj_const
        for i, v in row.items():
            if i in pinned:
                const += sign * v * pinned[i]
            else:
                c[pos[i]] += sign * v

    def lower_row(
        con: LinearMomentConstraint,
    ) -> tuple[dict[int, float], float] | None:
        row: dict[int, float] = {}
        rhs = con.rhs
        for i, v in con.coeffs:
            if i in pinned:
                rhs -= v * pinned[i]
            elif v != 0.0:
                row[pos[i]] = row.get(pos[i], 0.0) + v
        if not row:
            scale = max(1.0, abs(con.rhs))
            ok = (
                abs(rhs) <= 1e-9 * scale
                if con.relation == "="
                else (rhs >= -1e-9 * scale) == (con.relation == "<=")
            )
            if not ok:
                nonlocal infeasible
                infeasible = True
            return None
        return row, rhs

    eq_rows = []
    for con in problem.equalities:
        r = lower_row(con)
        if r is not None:
            eq_rows.append(r)
    le_rows = []
    for con in problem.inequalities:
        r = lower_row(con)
        if r is None:
            continue
        row, rhs = r
        if con.relation == ">=":
            row = {k: -v for k, v in row.items()}
            rhs = -rhs
        le_rows.append((row, rhs))
    # Per-variable boxes: the |<P>| <= 1 prior, tightened by measurements.
    # A unit-diagonal PSD block already implies |<P>| <= 1 for every word
    # it contains, so those rows are emitted only when the box is tighter
    # or the word is in the measured set (keeping the cone layout of a
    # scenario identical across strategies, which lets warm starts flow
    # between them).
    covered: set[int] = set()
    for block in problem.blocks:
        for _, _, _, i in block.affine:
            covered.add(i)
    from .relax import ROLE_MEASURED

    for k, i in enumerate(var_index):
        if i == -1:
            continue
        keep = (
            i not in covered
            or ROLE_MEASURED in reg.roles_of(i)
            or boxes[i, 0] != -1.0
            or boxes[i, 1] != 1.0
        )
        if keep:
            le_rows.append(({k: 1.0}, float(boxes[i, 1])))
            le_rows.append(({k: -1.0}, float(-boxes[i, 0])))

    psd = []
    for block in problem.blocks:
        m = block.dim
        data = _PsdData(dim=2 * m, const=[], cols={})
        for r, cc, coeff, i in block.affine:
            entries = _realify(r, cc, coeff, m)
            if i in pinned:
                v = pinned[i]
                if v != 0.0:
                    data.const.extend((a, b, val * v) for a, b, val in entries)
            else:
                data.cols.setdefault(pos[i], []).extend(entries)
        psd.append(data)

    data = ConicData(
        nvar=len(c),
        var_index=var_index,
        c=c,
        const=const,
        eq_rows=eq_rows,
        le_rows=le_rows,
        socs=socs,
        psd=psd,
        infeasible=infeasible,
    )
    data.box_value = _box_minimum(problem, data, pinned, pos)
    return data


def _box_minimum(
    problem: ConicProblem,
    data: ConicData,
    pinned: dict[int, float],
    pos: dict[int, int],
) -> float:
    """Closed-form minimum of the lowered objective over the boxes alone."""
    boxes = problem.boxes
    if problem.is_purity:
        spec: PuritySpec = problem.objective  # type: ignore[assignment]
        total = 0.0
        for i in spec.indices:
            if i in pinned:
                total += pinned[i] ** 2
            else:
                lo, hi = boxes[i]
                total += 0.0 if lo <= 0.0 <= hi else min(lo**2, hi**2)
        return total
    value = data.const
    for k, i in enumerate(data.var_index):
        coef = data.c[k]
        if coef > 0:
            value += coef * boxes[i, 0]
        elif coef < 0:
            value += coef * boxes[i, 1]
    return value


def box_bound(problem: ConicProblem, direction: str = "lower") -> float:
    """Interval-arithmetic bound from the boxes alone (the Measure-only
    answer).  Lower bounds of purity use min square per box."""
    data = compile_conic(problem, direction)
    if problem.is_purity:
        spec: PuritySpec = problem.objective  # type: ignore[assignment]
        return spec.value_from_square_sum(data.box_value)
    return data.box_value if direction == "lower" else -data.box_value


# ---------------------------------------------------------------------------
# backends

_SQ2 = float(np.sqrt(2.0))


def _svec_upper(dim: int, entries: Iterable[tuple[int, int, float]]) -> dict[int, float]:
    """Clarabel vectorisation: upper triangle, column-major, off-diag * sqrt2."""
    out: dict[int, float] = {}
    for i, j, v in entries:  # i <= j
        p = j * (j + 1) // 2 + i
        out[p] = out.get(p, 0.0) + (v if i == j else v * _SQ2)
    return out


def _svec_lower(dim: int, entries: Iterable[tuple[int, int, float]]) -> dict[int, float]:
    """SCS vectorisation: lower triangle, column-major, off-diag * sqrt2."""
    out: dict[int, float] = {}
    for i, j, v in entries:  # stored as i <= j; lower-triangle point is (j, i)
        col = i
        p = col * dim - col * (col - 1) // 2 + (j - col)
        out[p] = out.get(p, 0.0) + (v if i == j else v * _SQ2)
    return out


def _vec_full(dim: int, entries: Iterable[tuple[int, int, float]]) -> dict[int, float]:
    """cvxopt vectorisation: dense column-stacked square, both triangles."""
    out: dict[int, float] = {}
    for i, j, v in entries:
        out[j * dim + i] = out.get(j * dim + i, 0.0) + v
        if i != j:
            out[i * dim + j] = out.get(i * dim + j, 0.0) + v
    return out


def _stack(
    data: ConicData, psd_vec, soc_too: bool = True
) -> tuple[sp.csc_matrix, np.ndarray, dict]:
    """Assemble (A, b) for the s = b - A x in K form shared by clarabel
    and scs, with cone sizes reported in their common ordering."""
    rows: list[dict[int, float]] = []
    rhs: list[float] = []
    for row, b in data.eq_rows:
        rows.append(row)
        rhs.append(b)
    n_eq = len(rows)
    for row, b in data.le_rows:
        rows.append(row)
        rhs.append(b)
    n_le = len(data.le_rows)
    soc_dims = []
    for vec in data.socs:
        soc_dims.append(len(vec))
        for row, b in vec:
            rows.append({k: -v for k, v in row.items()})
            rhs.append(b)
    psd_dims = []
    for block in data.psd:
        psd_dims.append(block.dim)
        tri_len = block.dim * (block.dim + 1) // 2
        base = len(rows)
        rows.extend({} for _ in range(tri_len))
        rhs.extend([0.0] * tri_len)
        for p, v in psd_vec(block.dim, block.const).items():
            rhs[base + p] += v
        for var, entries in block.cols.items():
            for p, v in psd_vec(block.dim, entries).items():
                # s = b - A x must equal svec(T0) + sum_v x_v svec(Tv)
                rows[base + p][var] = rows[base + p].get(var, 0.0) - v
    # build sparse A with rows meaning  A x + s = b  <=>  s = b - A x
    data_v, data_i, data_j = [], [], []
    for r, row in enumerate(rows):
        for k, v in row.items():
            if v != 0.0:
                data_i.append(r)
                data_j.append(k)
                data_v.append(v)
    A = sp.csc_matrix(
        (data_v, (data_i, data_j)), shape=(len(rows), data.nvar), dtype=float
    )
    b = np.array(rhs, dtype=float)
    cones = dict(n_eq=n_eq, n_le=n_le, soc=soc_dims, psd=psd_dims)
    return A, b, cones


def _solve_clarabel(data: ConicData, opts: dict) -> dict:
    import clarabel

    A, b, cone_sizes = _stack(data, _svec_upper)
    cones = []
    if cone_sizes["n_eq"]:
        cones.append(clarabel.ZeroConeT(cone_sizes["n_eq"]))
    if cone_sizes["n_le"]:
        cones.append(clarabel.NonnegativeConeT(cone_sizes["n_le"]))
    for k in cone_sizes["soc"]:
        cones.append(clarabel.SecondOrderConeT(k))
    for d in cone_sizes["psd"]:
        cones.append(clarabel.PSDTriangleConeT(d))
    P = sp.csc_matrix((data.nvar, data.nvar))
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = int(opts.get("max_iter", 200))
    solver = clarabel.DefaultSolver(P, data.c, A, b, cones, settings)
    sol = solver.solve()
    name = str(sol.status)
    if name == "Solved":
        status = "optimal"
    elif name in ("AlmostSolved",):
        status = "near_optimal"
    elif "PrimalInfeasible" in name:
        status = "infeasible"
    elif "DualInfeasible" in name:
        status = "unbounded"
    else:
        status = "numerical_failure"
    return dict(status=status, obj=float(sol.obj_val), x=np.asarray(sol.x), raw=name)


def _solve_scs(data: ConicData, opts: dict) -> dict:
    import scs

    A, b, cone_sizes = _stack(data, _svec_lower)
    cone: dict = {}
    if cone_sizes["n_eq"]:
        cone["z"] = cone_sizes["n_eq"]
    if cone_sizes["n_le"]:
        cone["l"] = cone_sizes["n_le"]
    if cone_sizes["soc"]:
        cone["q"] = cone_sizes["soc"]
    if cone_sizes["psd"]:
        # scs takes the *matrix* side length; our dims are already embedded
        cone["s"] = cone_sizes["psd"]
    eps = float(opts.get("eps", 1e-6))
    solver = scs.SCS(
        dict(A=A, b=b, c=data.c),
        cone,
        eps_abs=eps,
        eps_rel=eps,
        max_iters=int(opts.get("max_iters", 200_000)),
        verbose=bool(opts.get("verbose", False)),
    )
    warm = opts.get("warm")
    if warm is not None:
        sol = solver.solve(warm_start=True, x=warm["x"], y=warm["y"], s=warm["s"])
    else:
        sol = solver.solve()
    txt = sol["info"]["status"].lower()
    if txt == "solved":
        status = "optimal"
    elif txt.startswith("solved"):
        status = "near_optimal"
    elif "infeasible" in txt:
        status = "infeasible"
    elif "unbounded" in txt:
        status = "unbounded"
    else:
        status = "numerical_failure"
    # use the dual objective too: for a minimisation it is the safe side
    pobj = float(sol["info"]["pobj"])
    return dict(
        status=status,
        obj=pobj,
        x=np.asarray(sol["x"]),
        raw=sol["info"]["status"],
        warm=dict(x=sol["x"], y=sol["y"], s=sol["s"]),
        gap=abs(sol["info"]["pobj"] - sol["info"]["dobj"]),
    )


def _solve_cvxopt(data: ConicData, opts: dict) -> dict:
    from cvxopt import matrix as dmat
    from cvxopt import solvers, spmatrix

    # conelp rejects rank-deficient equality blocks, and steady-state
    # rows routinely are; fold equalities into paired inequalities.
    le = list(data.le_rows)
    for row, b in data.eq_rows:
        le.append((row, b))
        le.append(({k: -v for k, v in row.items()}, -b))
    gi, gj, gv = [], [], []
    h: list[float] = []
    r = 0
    for row, b in le:
        for k, v in row.items():
            gi.append(r)
            gj.append(k)
            gv.append(v)
        h.append(b)
        r += 1
    dims = {"l": len(le), "q": [len(v) for v in data.socs], "s": []}
    for vec in data.socs:
        for row, b in vec:
            for k, v in row.items():
                gi.append(r)
                gj.append(k)
                gv.append(-v)
            h.append(b)
            r += 1
    for block in data.psd:
        dims["s"].append(block.dim)
        base = r
        hp = np.zeros(block.dim * block.dim)
        for p, v in _vec_full(block.dim, block.const).items():
            hp[p] += v
        h.extend(hp.tolist())
        for var, entries in block.cols.items():
            for p, v in _vec_full(block.dim, entries).items():
                gi.append(base + p)
                gj.append(var)
                gv.append(-v)
        r += block.dim * block.dim
    G = spmatrix(gv, gi, gj, size=(r, data.nvar))
    sol = solvers.conelp(
        dmat(data.c),
        G,
        dmat(np.array(h)),
        dims,
        options={
            "show_progress": False,
            "maxiters": int(opts.get("max_iter", 100)),
            "abstol": float(opts.get("abstol", 1e-8)),
            "reltol": float(opts.get("reltol", 1e-8)),
            "feastol": float(opts.get("feastol", 1e-8)),
        },
    )
    st = sol["status"]
    if st == "optimal":
        status = "optimal"
    elif st == "primal infeasible":
        status = "infeasible"
    elif st == "dual infeasible":
        status = "unbounded"
    else:
        gap = sol.get("relative gap")
        status = "near_optimal" if gap is not None and gap < 1e-5 else "numerical_failure"
    obj = sol["primal objective"]
    x = np.array(sol["x"]).ravel() if sol["x"] is not None else None
    out = dict(status=status, obj=float(obj) if obj is not None else np.nan, x=x, raw=st)
    if sol.get("gap") is not None:
        out["gap"] = float(sol["gap"])
    return out


_BACKENDS = {
    "clarabel": _solve_clarabel,
    "scs": _solve_scs,
    "cvxopt": _solve_cvxopt,
}


def _pick_backend(data: ConicData) -> str:
    # clarabel's KKT carries a dense (svec dim)^2 Hessian block per PSD
    # cone, so it only wins while blocks are small; cvxopt's per-iteration
    # congruences cost ~ nvar * dim^3, so it wants few variables; scs
    # (first order, warm-startable) takes everything big.
    max_psd = max((b.dim for b in data.psd), default=0)
    if max_psd == 0 or (max_psd <= 64 and data.nvar <= 4000):
        return "clarabel"
    if data.nvar <= 100 and max_psd <= 256:
        return "cvxopt"
    return "scs"


# ---------------------------------------------------------------------------
# results


@dataclass
class BoundResult:
    """One certified bound.  `value` already includes the intersection
    with the closed-form box bound, so it never degrades on a noisy or
    failed solve; `confidence` is the probability the bound is valid
    (1.0 when no finite-shot data entered the problem)."""

    value: float
    direction: str
    solver_status: str
    confidence: float
    wall_time: float
    solver: str
    gap: float | None = None
    warm: dict | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.solver_status in ("optimal", "near_optimal")


def solve(
    problem: ConicProblem,
    direction: str = "lower",
    solver: str | None = None,
    prior: float | None = None,
    **opts,
) -> BoundResult:
    """Compute one bound.  `solver` is clarabel / scs / cvxopt / box /
    None (auto by problem shape).  "box" -- or a problem with nothing
    but boxes in it -- short-circuits to interval arithmetic.

    `prior` is an already-certified bound on the same quantity in the
    same direction (e.g. from the bands-free version of this problem,
    whose feasible set is a superset); the result is intersected with
    it, so adding information can never loosen the reported bound.
    """
    t0 = time.perf_counter()
    data = compile_conic(problem, direction)
    confidence = problem.confidence

    def finish(value: float, status: str, name: str, gap=None, warm=None) -> BoundResult:
        if status == "infeasible":
            out_val = np.nan
        else:
            # the box bound stays valid whatever the solver did
            if status in ("optimal", "near_optimal"):
                out_val = max(value, data.box_value)
            else:
                out_val = data.box_value
            if problem.is_purity:
                spec: PuritySpec = problem.objective  # type: ignore[assignment]
                out_val = min(spec.value_from_square_sum(max(out_val, 0.0)), 1.0)
            elif direction == "upper":
                out_val = -out_val
            if prior is not None:
                out_val = (
                    min(out_val, prior) if direction == "upper" else max(out_val, prior)
                )
        return BoundResult(
            value=float(out_val),
            direction=direction,
            solver_status=status,
            confidence=confidence,
            wall_time=time.perf_counter() - t0,
            solver=name,
            gap=gap,
            warm=warm,
        )

    if data.infeasible:
        return finish(np.nan, "infeasible", "presolve")
    pure_box = not (data.psd or data.socs or data.eq_rows) and len(data.le_rows) == 2 * sum(
        1 for i in data.var_index if i != -1
    )
    if solver == "box" or pure_box or data.nvar == 0:
        return finish(data.box_value, "optimal", "box")

    name = solver or _pick_backend(data)
    if name not in _BACKENDS:
        raise ValueError(f"unknown solver {name!r}; pick from {sorted(_BACKENDS)}")
    try:
        res = _BACKENDS[name](data, opts)
    except Exception as exc:  # backend blew up outright
        warnings.warn(f"{name} raised {exc!r}; reporting box bound", stacklevel=2)
        return finish(np.nan, "numerical_failure", name)
    if res["status"] == "numerical_failure":
        # one retry on a rescaled objective; helps tiny-coefficient problems
        scale = float(np.max(np.abs(data.c))) or 1.0
        if scale != 1.0:
            data2 = ConicData(
                nvar=data.nvar,
                var_index=data.var_index,
                c=data.c / scale,
                const=0.0,
                eq_rows=data.eq_rows,
                le_rows=data.le_rows,
                socs=data.socs,
                psd=data.psd,
                box_value=(data.box_value - data.const) / scale,
            )
            try:
                res2 = _BACKENDS[name](data2, opts)
            except Exception:
                res2 = {"status": "numerical_failure", "obj": np.nan}
            if res2["status"] != "numerical_failure":
                res = dict(res2)
                res["obj"] = res2["obj"] * scale + data.const - 0.0
                res["_rescaled"] = True
    gap = res.get("gap")
    status = res["status"]
    if status == "optimal" and gap is not None:
        if gap > _GAP_TOL * max(1.0, abs(res["obj"])):
            status = "near_optimal"
    value = res["obj"] + (data.const if not res.get("_rescaled") else 0.0)
    return finish(value, status, name, gap=gap, warm=res.get("warm"))


def solve_both(
    problem: ConicProblem, solver: str | None = None, **opts
) -> tuple[BoundResult, BoundResult]:
    """(lower, upper) pair; purity problems have no upper direction."""
    lo = solve(problem, "lower", solver=solver, **opts)
    hi = solve(problem, "upper", solver=solver, **opts)
    return lo, hi


# ---------------------------------------------------------------------------
# sparse SDPA interchange


@dataclass
class SdpaProblem:
    """min c.x  s.t.  sum_i F_i x_i - F_0  psd-per-block; negative block
    sizes mean diagonal blocks (the usual sparse-format convention)."""

    c: np.ndarray
    block_sizes: list[int]
    entries: dict[tuple[int, int], list[tuple[int, int, float]]]
    # entries[(matno, block)] -> [(i, j, value)] with 1-based i <= j


def export_sdpa(problem: ConicProblem, path: str, direction: str = "lower") -> None:
    """Write the lowered problem in sparse SDPA (.dat-s) form.

    Boxes/inequalities become a diagonal block; each Hermitian block is
    exported in its real embedding; a purity objective is rewritten with
    per-word Schur-complement blocks [[1, y], [y, s]] plus the row
    sum(s) <= t, which any SDPA-speaking solver accepts.
    """
    data = compile_conic(problem, direction)
    if data.infeasible:
        raise ValueError("refusing to export an infeasible problem")
    nall = data.nvar
    aux: list[int] = []
    rows = list(data.le_rows)
    for row, b in data.eq_rows:
        rows.append((row, b))
        rows.append(({k: -v for k, v in row.items()}, -b))
    blocks: list[tuple[int, dict[int, list[tuple[int, int, float]]]]] = []
    if problem.is_purity and data.socs:
        t = data.c.argmax()  # the epigraph variable's position
        members = []
        for row, b in data.socs[0][1:-1]:
            ((k, v),) = row.items()
            members.append(k)
        srow: dict[int, float] = {}
        for y in members:
            s_k = nall + len(aux)
            aux.append(s_k)
            ent: dict[int, list[tuple[int, int, float]]] = {
                0: [(1, 1, -1.0)],  # F0 entry: constant block part is +1
                y + 1: [(1, 2, 1.0)],
                s_k + 1: [(2, 2, 1.0)],
            }
            blocks.append((2, ent))
            srow[s_k] = 1.0
        srow[int(t)] = -1.0
        rows.append((srow, 0.0))
    for pb in data.psd:
        ent = {0: [(i + 1, j + 1, -v) for i, j, v in pb.const]}
        for var, entries in pb.cols.items():
            ent[var + 1] = [(i + 1, j + 1, v) for i, j, v in entries]
        blocks.append((pb.dim, ent))

    m = nall + len(aux)
    c = np.zeros(m)
    c[: len(data.c)] = data.c
    with open(path, "w") as fh:
        fh.write('"moment relaxation export; objective constant %r"\n' % data.const)
        fh.write(f"{m}\n")
        nblocks = len(blocks) + (1 if rows else 0)
        fh.write(f"{nblocks}\n")
        sizes = [str(d) for d, _ in blocks] + ([f"-{len(rows)}"] if rows else [])
        fh.write(" ".join(sizes) + "\n")
        fh.write(" ".join("%.17g" % v for v in c) + "\n")
        for bno, (dim, ent) in enumerate(blocks, start=1):
            for matno, triplets in sorted(ent.items()):
                for i, j, v in triplets:
                    if v != 0.0:
                        fh.write(f"{matno} {bno} {i} {j} {v:.17g}\n")
        if rows:
            bno = len(blocks) + 1
            for rno, (row, b) in enumerate(rows, start=1):
                # rhs - row.x >= 0  <=>  sum_i (-row_i) x_i - (-rhs) >= 0
                if b != 0.0:
                    fh.write(f"0 {bno} {rno} {rno} {-b:.17g}\n")
                for k, v in sorted(row.items()):
                    if v != 0.0:
                        fh.write(f"{k + 1} {bno} {rno} {rno} {-v:.17g}\n")


def parse_sdpa(path: str) -> SdpaProblem:
    """Read a sparse SDPA file (comments, braces and commas tolerated)."""
    header: list[str] = []
    entries: dict[tuple[int, int], list[tuple[int, int, float]]] = {}
    c: np.ndarray | None = None
    sizes: list[int] | None = None
    m = nblocks = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("*") or line.startswith('"'):
                continue
            clean = line.replace(",", " ").replace("{", " ").replace("}", " ")
            clean = clean.replace("(", " ").replace(")", " ")
            parts = clean.split()
            if m is None:
                m = int(parts[0])
                continue
            if nblocks is None:
                nblocks = int(parts[0])
                continue
            if sizes is None:
                sizes = [int(p) for p in parts]
                if len(sizes) != nblocks:
                    raise ValueError("block-structure line does not match nBLOCK")
                continue
            if c is None:
                c = np.array([float(p) for p in parts])
                if len(c) != m:
                    raise ValueError("objective line does not match mDIM")
                continue
            matno, bno, i, j, val = (
                int(parts[0]),
                int(parts[1]),
                int(parts[2]),
                int(parts[3]),
                float(parts[4]),
            )
            if i > j:
                i, j = j, i
            entries.setdefault((matno, bno), []).append((i, j, val))
    if c is None or sizes is None:
        raise ValueError(f"{path} is not a complete sparse SDPA file")
    return SdpaProblem(c=c, block_sizes=sizes, entries=entries)


def solve_sdpa_problem(
    spr: SdpaProblem, solver: str = "clarabel", **opts
) -> BoundResult:
    """Solve a parsed SDPA problem: min c.x with X_b(x) >= 0 per block."""
    t0 = time.perf_counter()
    m = len(spr.c)
    le_rows: list[tuple[dict[int, float], float]] = []
    psd: list[_PsdData] = []
    for bno, size in enumerate(spr.block_sizes, start=1):
        if size < 0:
            # diagonal block: each position is one inequality row
            diag_rows: dict[int, dict[int, float]] = {}
            diag_rhs: dict[int, float] = {}
            for matno in range(0, m + 1):
                for i, j, v in spr.entries.get((matno, bno), []):
                    if i != j:
                        raise ValueError("off-diagonal entry in a diagonal block")
                    if matno == 0:
                        diag_rhs[i] = diag_rhs.get(i, 0.0) + v
                    else:
                        diag_rows.setdefault(i, {})[matno - 1] = (
                            diag_rows.setdefault(i, {}).get(matno - 1, 0.0) + v
                        )
            for i in sorted(set(diag_rows) | set(diag_rhs)):
                row = diag_rows.get(i, {})
                rhs = diag_rhs.get(i, 0.0)
                # sum row.x - rhs >= 0  ->  -row.x <= -rhs
                le_rows.append(({k: -v for k, v in row.items()}, -rhs))
        else:
            block = _PsdData(dim=size, const=[], cols={})
            for matno in range(0, m + 1):
                tri = [
                    (i - 1, j - 1, v) for i, j, v in spr.entries.get((matno, bno), [])
                ]
                if not tri:
                    continue
                if matno == 0:
                    block.const.extend((i, j, -v) for i, j, v in tri)
                else:
                    block.cols.setdefault(matno - 1, []).extend(tri)
            psd.append(block)
    data = ConicData(
        nvar=m,
        var_index=list(range(m)),
        c=spr.c.astype(float),
        const=0.0,
        eq_rows=[],
        le_rows=le_rows,
        socs=[],
        psd=psd,
        box_value=-np.inf,
    )
    res = _BACKENDS[solver](data, opts)
    return BoundResult(
        value=float(res["obj"]),
        direction="lower",
        solver_status=res["status"],
        confidence=1.0,
        wall_time=time.perf_counter() - t0,
        solver=solver,
        gap=res.get("gap"),
    )
