"""Render bound-vs-shots figures from a momentbound results CSV.

Reads the `momentbound-csv/1` format (the only contract shared with the
solver package), averages lower and upper bounds over repeats, and draws
one curve pair per strategy on a log-shots axis.  Rows with `n_tot = inf`
become dashed horizontal asymptotes.  With --group-by confidence the
figure instead shows one lower-bound curve per confidence level, which is
the right shape for purity sweeps.

Usage:  python3 plot_bounds.py --csv results.csv --out fig.png
"""

import argparse
import csv
import math
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

SCHEMA = "momentbound-csv/1"
FIELDS = [
    "scenario", "strategy", "n_tot", "repeat", "delta",
    "confidence", "lb", "ub", "status", "wall_time",
]


class SchemaError(ValueError):
    """The file is not a momentbound-csv/1 result frame."""


@dataclass(frozen=True)
class Row:
    scenario: str
    strategy: str
    n_tot: float
    repeat: int
    delta: float | None
    confidence: float
    lb: float
    ub: float
    status: str


def _num(text: str) -> float:
    if text == "":
        return math.nan
    if text == "inf":
        return math.inf
    return float(text)


def read_frame(path: str) -> list[Row]:
    """Parse and validate a results CSV; raises SchemaError on mismatch."""
    with open(path, newline="") as fh:
        tag = fh.readline().strip()
        if tag != f"# {SCHEMA}":
            raise SchemaError(f"{path}: expected '# {SCHEMA}', got {tag!r}")
        reader = csv.DictReader(fh)
        missing = set(FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise SchemaError(f"{path}: missing columns {sorted(missing)}")
        rows = []
        for rec in reader:
            row = Row(
                scenario=rec["scenario"],
                strategy=rec["strategy"],
                n_tot=_num(rec["n_tot"]),
                repeat=int(rec["repeat"]),
                delta=None if rec["delta"] == "" else float(rec["delta"]),
                confidence=_num(rec["confidence"]),
                lb=_num(rec["lb"]),
                ub=_num(rec["ub"]),
                status=rec["status"],
            )
            if (
                "optimal" in row.status
                and math.isfinite(row.lb)
                and math.isfinite(row.ub)
                and row.lb > row.ub + 1e-9
            ):
                raise SchemaError(f"{path}: row with lb > ub: {row}")
            rows.append(row)
    return rows


def _mean(values: list[float]) -> float:
    vals = [v for v in values if not math.isnan(v)]
    return sum(vals) / len(vals) if vals else math.nan


def _key(row: Row, group_by: str) -> str:
    if group_by == "confidence":
        return f"{row.confidence:.1%} confidence"
    return row.strategy


def build_figure(rows: list[Row], group_by: str = "strategy"):
    """Figure with mean bound curves vs shots, grouped by strategy or
    confidence level.  Returned (not saved) so tests can introspect it."""
    if group_by not in ("strategy", "confidence"):
        raise ValueError(f"unknown group_by {group_by!r}")
    finite = [r for r in rows if math.isfinite(r.n_tot)]
    asymptotic = [r for r in rows if math.isinf(r.n_tot)]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    keys = sorted({_key(r, group_by) for r in finite})
    for key in keys:
        mine = [r for r in finite if _key(r, group_by) == key]
        shots = sorted({r.n_tot for r in mine})
        lb = [_mean([r.lb for r in mine if r.n_tot == s]) for s in shots]
        ub = [_mean([r.ub for r in mine if r.n_tot == s]) for s in shots]
        line, = ax.plot(shots, lb, marker="o", label=key)
        if not all(math.isnan(u) for u in ub):
            ax.plot(shots, ub, marker="s", color=line.get_color())
        for r in asymptotic:
            if _key(r, group_by) != key:
                continue
            for v in (r.lb, r.ub):
                if math.isfinite(v):
                    ax.axhline(v, color=line.get_color(), linestyle="--",
                               linewidth=1.0)
    ax.set_xscale("log")
    ax.set_xlabel("total shots $N_{tot}$")
    ax.set_ylabel("certified bound")
    if rows:
        ax.set_title(rows[0].scenario)
    ax.legend()
    fig.tight_layout()
    return fig


def plot_bounds(csv_path: str, out_path: str, group_by: str = "strategy") -> str:
    fig = build_figure(read_frame(csv_path), group_by)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--csv", required=True, help="momentbound results CSV")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--group-by", default="strategy",
                    choices=("strategy", "confidence"))
    args = ap.parse_args(argv)
    try:
        plot_bounds(args.csv, args.out, args.group_by)
    except (OSError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
