"""Scenario runner and command-line entry point.

A scenario bundles a model, an objective, a measurement plan and a shot
schedule, and produces one CSV row per (strategy, N_tot, repeat, delta):

* ``Measure``      -- confidence bands alone (interval arithmetic; the
                      LP collapses to a closed form because every band
                      is a per-word box);
* ``SDP``          -- positivity blocks plus steady-state / symmetry
                      rows, no measurement data (confidence 1.0);
* ``SDP&Measure``  -- both; its bounds are intersected with the SDP-only
                      and box bounds, which are valid for the same
                      quantity, so combining information never loosens
                      the reported interval.

Rows are deterministic given (config, seed) apart from wall_time.
Solver failures become rows with a status, never a crash; only broken
configuration exits nonzero.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import pickle
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from . import confidence, models, oracle, relax, sampler, sdp
from .pauli import OperatorPoly, PauliString, from_label, strings_up_to_weight

CSV_SCHEMA = "momentbound-csv/1"

STRATEGY_MEASURE = "Measure"
STRATEGY_SDP = "SDP"
STRATEGY_BOTH = "SDP&Measure"
_STRATEGIES = (STRATEGY_MEASURE, STRATEGY_SDP, STRATEGY_BOTH)

_POOL_KINDS = (
    "objective_strings",
    "second_order_all",
    "most_frequent_k",
    "first_generated_k",
    "custom",
)


class ConfigError(ValueError):
    """Bad scenario configuration; the only error class that exits nonzero."""


@dataclass
class MeasurementSpec:
    kind: str = "objective_strings"
    k: int | None = None
    letters: str | None = None
    strings: list[str] | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind not in _POOL_KINDS:
            raise ConfigError(f"unknown measurement strategy {self.kind!r}")
        if self.kind.endswith("_k") and (self.k is None or self.k < 1):
            raise ConfigError(f"{self.kind} needs a positive k")
        if self.kind == "custom" and not self.strings:
            raise ConfigError("custom measurement needs a string list")


@dataclass
class ScenarioConfig:
    name: str
    model: dict
    objective: str = "energy"
    custom_objective: list | None = None
    delta: float = 0.003
    deltas: list[float] | None = None  # confidence sweeps
    shots: list[float] = field(default_factory=lambda: [math.inf])
    strategies: list[str] = field(default_factory=lambda: list(_STRATEGIES))
    measurement: list[MeasurementSpec] = field(
        default_factory=lambda: [MeasurementSpec()]
    )
    basis_size: int = 30
    constraint_budget: int = 0
    rdm_sites: list[list[int]] = field(default_factory=list)
    purity_order: int = 2
    repeats: int = 1
    seed: int = 0
    solver: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.shots:
            raise ConfigError("shot schedule must be nonempty")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        bad = [s for s in self.strategies if s not in _STRATEGIES]
        if bad:
            raise ConfigError(f"unknown strategies {bad}; choose from {_STRATEGIES}")
        if self.objective not in ("energy", "heat_current", "purity", "custom"):
            raise ConfigError(f"unknown objective {self.objective!r}")
        if self.objective == "custom" and not self.custom_objective:
            raise ConfigError("custom objective needs [label, coeff] terms")
        for d in [self.delta] + list(self.deltas or ()):
            if not 0.0 < d < 1.0:
                raise ConfigError(f"delta must lie in (0, 1), got {d}")


def _parse_shots(raw: Iterable) -> list[float]:
    out = []
    for s in raw:
        if isinstance(s, str) and s.lower() in ("inf", "infinite"):
            out.append(math.inf)
        else:
            v = float(s)
            if not v >= 1:
                raise ConfigError(f"shot count must be >= 1 or 'inf', got {s!r}")
            out.append(v)
    return out


def config_from_dict(doc: dict) -> ScenarioConfig:
    doc = dict(doc)
    doc.pop("description", None)
    if "shots" in doc:
        doc["shots"] = _parse_shots(doc["shots"])
    meas = doc.get("measurement", [{}])
    if isinstance(meas, dict):
        meas = [meas]
    try:
        doc["measurement"] = [MeasurementSpec(**m) for m in meas]
        return ScenarioConfig(**doc)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path) as fh:
            return config_from_dict(json.load(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None


def load_preset(name: str) -> ScenarioConfig:
    ref = resources.files("momentbound").joinpath(f"presets/{name}.json")
    if not ref.is_file():
        have = sorted(
            p.name[: -len(".json")]
            for p in resources.files("momentbound").joinpath("presets").iterdir()
            if p.name.endswith(".json")
        )
        raise ConfigError(f"no preset {name!r}; available: {have}")
    return config_from_dict(json.loads(ref.read_text()))


# ---------------------------------------------------------------------------
# scenario compilation


@dataclass
class _Compiled:
    config: ScenarioConfig
    n: int
    objective: OperatorPoly | sdp.PuritySpec
    registry: relax.MomentRegistry
    blocks: list
    constraints: list
    pools: list[tuple[str, list[PauliString]]]  # (strategy label suffix, words)
    source: object  # sampler source of true moments


def _build_model(spec: dict):
    """Returns (n, hamiltonian_poly, lindblad_model_or_None)."""
    kind = spec.get("kind")
    if kind == "tfi2d":
        rows, cols = int(spec["rows"]), int(spec["cols"])
        h = models.build_tfi_2d(rows, cols, g=spec.get("g", 1.0), J=spec.get("J", 1.0))
        return rows * cols, h, None
    if kind == "boundary_driven":
        rows, cols = int(spec["rows"]), int(spec["cols"])
        baths = {
            tag: models.BathSpec(
                temperature=b["temperature"],
                rate=b["rate"],
                quantum=b.get("quantum"),
            )
            for tag, b in spec["baths"].items()
        }
        model = models.build_boundary_driven(
            rows,
            cols,
            g=spec.get("g", 1.0),
            J=spec.get("J", 1.0),
            hot=baths["hot"],
            cold=baths["cold"],
        )
        return model.n, model.hamiltonian, model
    if kind == "majumdar_ghosh":
        n = int(spec["n"])
        h = models.build_majumdar_ghosh(n, raw=bool(spec.get("raw", False)))
        return n, h, None
    raise ConfigError(f"unknown model kind {spec.get('kind')!r}")


def _objective_poly(config: ScenarioConfig, n: int, h, model) -> OperatorPoly:
    if config.objective == "energy":
        return h
    if config.objective == "heat_current":
        if model is None:
            raise ConfigError("heat_current needs a boundary-driven model")
        return models.heat_current_poly(model, "hot")
    if config.objective == "custom":
        poly = OperatorPoly.zero(n)
        for label, coeff in config.custom_objective:  # type: ignore[union-attr]
            poly = poly + OperatorPoly.from_string(from_label(label, n), coeff)
        return poly
    raise AssertionError(config.objective)


def _truth_source(config: ScenarioConfig, n: int, h, model):
    """Where true moments come from when simulating shots."""
    kind = config.model.get("kind")
    if kind == "majumdar_ghosh":
        return sampler.MGSource(n, seed=config.seed)
    if model is not None:
        if n > 6:
            raise ConfigError(
                f"steady-state sampling is oracle-backed and capped at 6 "
                f"qubits; n={n}. Use --infinite-shots-free strategies or a "
                "smaller grid."
            )
        return sampler.ExactStateSource(oracle.exact_steady_state(model), seed=config.seed)
    if n > 12:
        raise ConfigError(f"ground-state sampling capped at 12 qubits; n={n}")
    _, state = oracle.exact_ground_state(h)
    return sampler.ExactStateSource(state, seed=config.seed)


def _resolve_pool(
    spec: MeasurementSpec,
    config: ScenarioConfig,
    registry: relax.MomentRegistry,
    objective_words: list[PauliString],
    n: int,
) -> list[PauliString]:
    if spec.kind == "objective_strings":
        return list(objective_words)
    if spec.kind == "second_order_all":
        return [p for p in strings_up_to_weight(n, 2) if not p.is_identity]
    if spec.kind == "custom":
        return [from_label(s, n) for s in spec.strings or ()]
    if spec.kind == "first_generated_k":
        pool = relax.registration_order(registry, k=spec.k, letters=spec.letters)
    else:  # most_frequent_k
        ranked = sorted(
            range(1, len(registry)),
            key=lambda i: (-registry.count_of(i), registry.string_at(i).sort_key()),
        )
        pool = [registry.string_at(i) for i in ranked]
        if spec.letters:
            allowed = set(spec.letters.upper())
            pool = [
                p
                for p in pool
                if {p.letter(j) for j in range(p.n)} - {"I"} <= allowed
            ]
        pool = pool[: spec.k]
    if spec.k is not None and len(pool) < spec.k:
        raise ConfigError(
            f"{spec.kind}: asked for {spec.k} words but only {len(pool)} are "
            "available in the registry"
        )
    return pool


def compile_scenario(config: ScenarioConfig) -> _Compiled:
    """Build the registry, blocks and measurement pools for a scenario.

    Order matters and is part of the contract: objective, then
    steady-state generation, then data-independent measurement pools,
    then basis selection and positivity blocks, then the pools defined
    *by* the assembled SDP (most-frequent / first-generated), so that
    the latter see the finished occupation counts and registration
    order their selection rules are stated in terms of.
    """
    n, h, model = _build_model(config.model)
    registry = relax.MomentRegistry(n)

    if config.objective == "purity":
        words = [
            p
            for p in strings_up_to_weight(n, config.purity_order)
            if not p.is_identity
        ]
        objective: OperatorPoly | sdp.PuritySpec = sdp.purity_objective(registry, words)
        objective_words = words
    else:
        poly = _objective_poly(config, n, h, model)
        relax.register_objective(poly, registry)
        objective = poly
        objective_words = [p for p in poly.strings() if not p.is_identity]

    constraints: list = []
    if model is not None and config.constraint_budget > 0:
        constraints = relax.generate_steady_constraints(
            model, objective_words, config.constraint_budget, registry
        )

    early: list[tuple[str, list[PauliString] | MeasurementSpec]] = []
    late: list[MeasurementSpec] = []
    pools: list[tuple[str, list[PauliString]]] = []
    for spec in config.measurement:
        if spec.kind in ("most_frequent_k", "first_generated_k"):
            late.append(spec)
        else:
            pool = _resolve_pool(spec, config, registry, objective_words, n)
            for p in pool:
                registry.register(p, role=relax.ROLE_MEASURED, count=True)
            pools.append((spec.label, pool))

    basis = relax.select_moment_basis(registry, config.basis_size)
    blocks = [relax.build_moment_matrix(basis, registry)]
    for sites in config.rdm_sites:
        blocks.append(relax.build_rdm_block(sites, registry))

    for spec in late:
        pool = _resolve_pool(spec, config, registry, objective_words, n)
        for p in pool:
            registry.register(p, role=relax.ROLE_MEASURED, count=True)
        pools.append((spec.label, pool))
    registry.freeze()

    source = None
    needs_shots = any(
        s in (STRATEGY_MEASURE, STRATEGY_BOTH) for s in config.strategies
    )
    if needs_shots:
        source = _truth_source(config, n, h, model)
    return _Compiled(
        config=config,
        n=n,
        objective=objective,
        registry=registry,
        blocks=blocks,
        constraints=constraints,
        pools=pools,
        source=source,
    )


# ---------------------------------------------------------------------------
# running


@dataclass
class Row:
    scenario: str
    strategy: str
    n_tot: float
    repeat: int
    delta: float | None  # None for data-free rows
    confidence: float
    lb: float
    ub: float
    status: str
    wall_time: float


_CSV_FIELDS = [
    "scenario",
    "strategy",
    "n_tot",
    "repeat",
    "delta",
    "confidence",
    "lb",
    "ub",
    "status",
    "wall_time",
]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        if math.isinf(v):
            return "inf"
        return "%.12g" % v
    return str(v)


def write_csv(rows: Sequence[Row], path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {CSV_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for r in rows:
            writer.writerow([_fmt(getattr(r, f)) for f in _CSV_FIELDS])


def summarize(rows: Sequence[Row]) -> dict:
    """Mean lb/ub/width per (strategy, n_tot, delta) over repeats."""
    groups: dict[tuple, list[Row]] = {}
    for r in rows:
        groups.setdefault((r.strategy, r.n_tot, r.delta), []).append(r)
    out = []
    for (strategy, n_tot, delta), grp in sorted(
        groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2] or 0.0)
    ):
        lbs = [g.lb for g in grp if not math.isnan(g.lb)]
        ubs = [g.ub for g in grp if not math.isnan(g.ub)]
        entry = {
            "strategy": strategy,
            "n_tot": n_tot,
            "delta": delta,
            "repeats": len(grp),
            "mean_lb": float(np.mean(lbs)) if lbs else None,
            "mean_ub": float(np.mean(ubs)) if ubs else None,
        }
        if lbs and ubs and len(lbs) == len(ubs):
            entry["mean_width"] = float(
                np.mean([u - l for l, u in zip(lbs, ubs)])
            )
        out.append(entry)
    return {"schema": "momentbound-summary/1", "groups": out}


def _solve_directions(problem, *, purity: bool, solver, priors, warm, opts):
    """(lb, ub, status, wall, new_warm): ub is nan for purity problems."""
    t0 = time.perf_counter()
    kw = dict(opts)
    if warm is not None:
        kw["warm"] = warm.get("lower")
    lo = sdp.solve(problem, "lower", solver=solver, prior=priors.get("lower"), **kw)
    if purity:
        return lo.value, math.nan, lo.solver_status, lo.wall_time, {"lower": lo.warm}
    kw = dict(opts)
    if warm is not None:
        kw["warm"] = warm.get("upper")
    hi = sdp.solve(problem, "upper", solver=solver, prior=priors.get("upper"), **kw)
    status = lo.solver_status
    if hi.solver_status != lo.solver_status:
        status = f"{lo.solver_status}/{hi.solver_status}"
    return (
        lo.value,
        hi.value,
        status,
        time.perf_counter() - t0,
        {"lower": lo.warm, "upper": hi.warm},
    )


def run_scenario(config: ScenarioConfig) -> list[Row]:
    comp = compile_scenario(config)
    cfg = comp.config
    purity = isinstance(comp.objective, sdp.PuritySpec)
    solver_name = cfg.solver.get("name")
    opts = {
        k: v for k, v in cfg.solver.items() if k not in ("name", "chain_warm")
    }
    deltas = list(cfg.deltas or [cfg.delta])

    # data-free SDP bound: solved once, replicated over the schedule, and
    # reused as a certified floor/ceiling for the combined strategy
    sdp_priors: dict[str, float] = {}
    sdp_row = None
    if STRATEGY_SDP in cfg.strategies or STRATEGY_BOTH in cfg.strategies:
        prob = sdp.assemble(
            comp.objective,
            comp.registry,
            moment_blocks=comp.blocks,
            constraints=comp.constraints,
            confidence=1.0,
        )
        try:
            lb, ub, status, wall, _ = _solve_directions(
                prob, purity=purity, solver=solver_name, priors={}, warm=None, opts=opts
            )
            if not math.isnan(lb):
                sdp_priors["lower"] = lb
            if not math.isnan(ub):
                sdp_priors["upper"] = ub
        except Exception as exc:  # keep the sweep alive; the row records it
            lb = ub = math.nan
            status, wall = "numerical_failure", 0.0
            print(f"[{cfg.name}] SDP strategy failed: {exc}", file=sys.stderr)
        sdp_row = (lb, ub, status, wall)

    cells = [(n_tot, r) for n_tot in cfg.shots for r in range(cfg.repeats)]
    shared = dict(
        comp=comp,
        purity=purity,
        deltas=deltas,
        solver_name=solver_name,
        opts=opts,
        sdp_priors=sdp_priors,
        sdp_row=sdp_row,
    )
    if cfg.workers > 1:
        # executor.map keeps submission order, so the merged rows land in
        # (N_tot, repeat) order exactly as in the sequential path
        from concurrent.futures import ProcessPoolExecutor

        payload = pickle.dumps(shared)
        with ProcessPoolExecutor(
            max_workers=cfg.workers, initializer=_pool_init, initargs=(payload,)
        ) as ex:
            chunks = list(ex.map(_pool_cell, cells))
    else:
        warm_state: dict[str, dict | None] = {}
        chunks = [
            _cell_rows(cell, warm_state=warm_state, **shared) for cell in cells
        ]
    return [row for chunk in chunks for row in chunk]


_POOL: dict = {}


def _pool_init(payload: bytes) -> None:
    _POOL.update(pickle.loads(payload))


def _pool_cell(cell):
    return _cell_rows(cell, warm_state={}, **_POOL)


def _cell_rows(
    cell,
    *,
    comp: _Compiled,
    purity: bool,
    deltas: list[float],
    solver_name,
    opts: dict,
    sdp_priors: dict,
    sdp_row,
    warm_state: dict,
) -> list[Row]:
    """All rows for one (N_tot, repeat) grid cell.

    Records are drawn once per cell and shared across deltas, so a
    confidence sweep sees nested bands around the same empirical means.
    """
    n_tot, repeat = cell
    cfg = comp.config
    rows: list[Row] = []
    records_by_pool: dict[str, object] = {}
    if comp.source is not None:
        for label, pool in comp.pools:
            if math.isinf(n_tot):
                records_by_pool[label] = None  # exact bands below
            else:
                shots_each = int(n_tot) // len(pool)
                if shots_each < 1:
                    raise ConfigError(
                        f"N_tot={n_tot:g} cannot cover {len(pool)} "
                        "observables with at least one shot each"
                    )
                records_by_pool[label] = sampler.sample_records(
                    comp.source, pool, shots_each, seed=cfg.seed, repeat=repeat
                )
    for delta in deltas:
        for strategy in cfg.strategies:
            if strategy == STRATEGY_SDP:
                lb, ub, status, wall = sdp_row  # type: ignore[misc]
                rows.append(
                    Row(
                        scenario=cfg.name,
                        strategy=strategy,
                        n_tot=n_tot,
                        repeat=repeat,
                        delta=None,
                        confidence=1.0,
                        lb=lb,
                        ub=ub,
                        status=status,
                        wall_time=wall,
                    )
                )
                continue
            for label, pool in comp.pools:
                tag = f"{strategy} {label}".strip()
                recs = records_by_pool[label]
                if recs is None:
                    ivs = sampler.exact_intervals(comp.source, pool)
                    conf = 1.0
                else:
                    ivs = confidence.build_intervals(recs, delta)
                    conf = 1.0 - delta
                lb, ub, status, wall = _run_one(
                    comp,
                    strategy,
                    ivs,
                    conf,
                    purity,
                    solver_name,
                    sdp_priors,
                    warm_state,
                    tag,
                    opts,
                )
                rows.append(
                    Row(
                        scenario=cfg.name,
                        strategy=tag,
                        n_tot=n_tot,
                        repeat=repeat,
                        delta=delta if recs is not None else None,
                        confidence=conf,
                        lb=lb,
                        ub=ub,
                        status=status,
                        wall_time=wall,
                    )
                )
    return rows


def _run_one(
    comp: _Compiled,
    strategy: str,
    intervals,
    conf: float,
    purity: bool,
    solver_name,
    sdp_priors: dict,
    warm_state: dict,
    tag: str,
    opts: dict,
):
    cfg = comp.config
    try:
        if strategy == STRATEGY_MEASURE:
            prob = sdp.assemble(
                comp.objective, comp.registry, intervals=intervals, confidence=conf
            )
            priors: dict = {}
            warm = None
        else:
            prob = sdp.assemble(
                comp.objective,
                comp.registry,
                moment_blocks=comp.blocks,
                constraints=comp.constraints,
                intervals=intervals,
                confidence=conf,
            )
            priors = sdp_priors
            warm = warm_state.get(tag)
        lb, ub, status, wall, new_warm = _solve_directions(
            prob,
            purity=purity,
            solver=solver_name,
            priors=priors,
            warm=warm,
            opts=opts,
        )
        if strategy == STRATEGY_BOTH and cfg.workers == 1:
            warm_state[tag] = new_warm
        return lb, ub, status, wall
    except ConfigError:
        raise
    except Exception as exc:
        print(f"[{cfg.name}] {tag} failed: {exc}", file=sys.stderr)
        return math.nan, math.nan, "numerical_failure", 0.0


# ---------------------------------------------------------------------------
# subcommands

_SUBCOMMANDS = (
    "bound-energy",
    "bound-heat",
    "bound-purity",
    "sweep-shots",
    "sweep-confidence",
    "export-sdpa",
    "oracle",
)

_TEMPLATES: dict[str, dict] = {
    "bound-energy": {
        "name": "bound-energy",
        "model": {"kind": "tfi2d", "rows": 2, "cols": 2, "g": 1.0, "J": 1.0},
        "objective": "energy",
        "strategies": [STRATEGY_SDP],
        "measurement": {"kind": "second_order_all"},
        "basis_size": 67,
        "shots": ["inf"],
    },
    "bound-heat": {
        "name": "bound-heat",
        "model": {
            "kind": "boundary_driven",
            "rows": 2,
            "cols": 3,
            "g": 1.0,
            "J": 1.0,
            "baths": {
                "hot": {"temperature": 1.0, "rate": 0.001},
                "cold": {"temperature": 0.1, "rate": 0.011},
            },
        },
        "objective": "heat_current",
        "strategies": [STRATEGY_SDP],
        "basis_size": 40,
        "constraint_budget": 600,
        "shots": ["inf"],
    },
    "bound-purity": {
        "name": "bound-purity",
        "model": {"kind": "tfi2d", "rows": 2, "cols": 2, "g": 1.0, "J": 1.0},
        "objective": "purity",
        "strategies": [STRATEGY_BOTH],
        "measurement": {"kind": "second_order_all"},
        "basis_size": 67,
        "shots": [100000.0],
        "delta": 0.003,
    },
    "sweep-shots": {
        "name": "sweep-shots",
        "model": {"kind": "tfi2d", "rows": 2, "cols": 2, "g": 1.0, "J": 1.0},
        "objective": "energy",
        "strategies": list(_STRATEGIES),
        "measurement": {"kind": "second_order_all"},
        "basis_size": 67,
        "shots": [1000.0, 10000.0, 100000.0],
        "repeats": 5,
        "delta": 0.003,
    },
    "sweep-confidence": {
        "name": "sweep-confidence",
        "model": {"kind": "tfi2d", "rows": 2, "cols": 2, "g": 1.0, "J": 1.0},
        "objective": "purity",
        "strategies": [STRATEGY_BOTH],
        "measurement": {"kind": "second_order_all"},
        "basis_size": 67,
        "shots": [100000.0],
        "deltas": [0.32, 0.05, 0.003],
        "repeats": 3,
    },
}


def _scenario_from_args(args) -> ScenarioConfig:
    if args.config:
        config = load_config(args.config)
    elif args.preset:
        config = load_preset(args.preset)
    elif args.command in _TEMPLATES:
        config = config_from_dict(_TEMPLATES[args.command])
    else:
        raise ConfigError(f"{args.command} needs --config or --preset")
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.infinite_shots:
        config = dataclasses.replace(config, shots=[math.inf])
    return config


def _cmd_run(args) -> int:
    config = _scenario_from_args(args)
    rows = run_scenario(config)
    if args.out:
        write_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(summarize(rows), fh, indent=1)
        print(f"wrote summary to {args.json}")
    if not args.out and not args.json:
        for g in summarize(rows)["groups"]:
            lb = "-inf" if g["mean_lb"] is None else "%.9g" % g["mean_lb"]
            ub = "+inf" if g["mean_ub"] is None else "%.9g" % g["mean_ub"]
            shots = "inf" if math.isinf(g["n_tot"]) else "%g" % g["n_tot"]
            print(
                f"{config.name} {g['strategy']:<24s} N_tot={shots:>8s} "
                f"delta={g['delta'] if g['delta'] is not None else '-'}: "
                f"[{lb}, {ub}]"
            )
    return 0


def _cmd_export(args) -> int:
    config = _scenario_from_args(args)
    comp = compile_scenario(config)
    intervals = ()
    conf = 1.0
    if args.infinite_shots and comp.source is not None and comp.pools:
        intervals = sampler.exact_intervals(comp.source, comp.pools[0][1])
    prob = sdp.assemble(
        comp.objective,
        comp.registry,
        moment_blocks=comp.blocks,
        constraints=comp.constraints,
        intervals=intervals,
        confidence=conf,
    )
    out = args.out or f"{config.name}.dat-s"
    sdp.export_sdpa(prob, out)
    print(f"wrote {out}")
    return 0


def _cmd_oracle(args) -> int:
    config = _scenario_from_args(args)
    n, h, model = _build_model(config.model)
    if model is not None:
        if n > 6:
            raise ConfigError(f"steady-state oracle capped at 6 qubits, n={n}")
        state = oracle.exact_steady_state(model)
        print(f"steady-state heat current (hot): "
              f"{oracle.exact_heat_current(model, 'hot'):.12g}")
        print(f"degenerate: {state.degenerate}")
    else:
        if n > 12:
            raise ConfigError(f"ground-state oracle capped at 12 qubits, n={n}")
        energy, state = oracle.exact_ground_state(h)
        print(f"ground-state energy: {energy:.12g}")
        print(f"degenerate: {state.degenerate}")
    if config.objective == "purity" and n <= 6:
        words = strings_up_to_weight(n, config.purity_order)
        moms = [state.expectation(p) for p in words]
        print(f"truncated purity (order {config.purity_order}): "
              f"{oracle.truncated_purity(n, moms):.12g}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="momentbound",
        description="Certified bounds on spin-system properties from "
        "moment relaxations and finite-shot confidence bands.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="scenario JSON file")
        p.add_argument("--preset", help="built-in scenario name (e.g. dimer-50)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", help="CSV output path (.dat-s for export-sdpa)")
        p.add_argument("--json", help="JSON summary path")
        p.add_argument(
            "--infinite-shots",
            action="store_true",
            help="replace the shot schedule with exact (zero-width) bands",
        )
    args = parser.parse_args(argv)
    try:
        if args.command == "export-sdpa":
            return _cmd_export(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        return _cmd_run(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
