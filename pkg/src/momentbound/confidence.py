"""Finite-shot confidence regions: Hoeffding half-widths with a union
bound over the measured observables, and the interval constraints they
induce on moments.

For K observables with spectrum in [-1, 1], measured with N_i shots
each, requiring joint failure probability delta and splitting it evenly
gives the per-observable half-width

    eps_i = sqrt(2 * ln(2K / delta) / N_i),

since the two-sided Hoeffding tail for a mean of [-1, 1] variables is
2 * exp(-N * eps^2 / 2).  All K bands then hold simultaneously with
probability at least 1 - delta.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .pauli import OperatorPoly, PauliString, from_label

__all__ = [
    "MeasurementRecord",
    "ConfidencePlan",
    "IntervalConstraint",
    "epsilon",
    "hoeffding_tail",
    "make_plan",
    "build_intervals",
    "exact_interval",
    "save_records",
    "load_records",
]


@dataclass(frozen=True)
class MeasurementRecord:
    """Empirical mean of one observable with unit-bounded spectrum.

    ``observable`` is an OperatorPoly (a bare PauliString is promoted to
    the 1.0-weighted polynomial).  The spectrum-in-[-1,1] requirement is
    the caller's responsibility for general polynomials; it holds
    automatically for Pauli words and for H / ||H||_1-style rescalings.
    """

    observable: OperatorPoly
    shots: int
    mean: float

    def __post_init__(self) -> None:
        if isinstance(self.observable, PauliString):
            object.__setattr__(
                self, "observable", OperatorPoly.from_string(self.observable)
            )
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        if abs(self.mean) > 1.0:
            raise ValueError(f"empirical mean {self.mean} outside [-1, 1]")
        if not self.observable.is_hermitian():
            raise ValueError("measured observable must be Hermitian")

    def single_string(self) -> PauliString | None:
        """The observable's string if it is a single unit-weight word."""
        terms = list(self.observable.items())
        if len(terms) == 1 and abs(terms[0][1] - 1.0) < 1e-12:
            return terms[0][0]
        return None


@dataclass(frozen=True)
class ConfidencePlan:
    """delta split over K observables with the per-record half-widths."""

    delta: float
    k: int
    epsilons: tuple[float, ...]

    @property
    def confidence(self) -> float:
        return 1.0 - self.delta


@dataclass(frozen=True)
class IntervalConstraint:
    """lower <= sum_alpha coeff_alpha * <P_alpha> <= upper."""

    coeffs: tuple[tuple[PauliString, float], ...]
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(
                f"empty interval [{self.lower}, {self.upper}]"
            )

    def strings(self) -> list[PauliString]:
        return [p for p, _ in self.coeffs]


def epsilon(shots: int, k: int, delta: float) -> float:
    """Hoeffding half-width sqrt(2 ln(2K/delta) / N)."""
    if shots < 1 or k < 1:
        raise ValueError(f"shots and K must be >= 1, got N={shots}, K={k}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.sqrt(2.0 * math.log(2.0 * k / delta) / shots)


def hoeffding_tail(shots: int, eps: float) -> float:
    """Two-sided deviation bound 2 exp(-N eps^2 / 2) for [-1,1] means."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if eps <= 0.0:
        raise ValueError(f"eps must be > 0, got {eps}")
    return 2.0 * math.exp(-shots * eps * eps / 2.0)


def make_plan(records: Sequence[MeasurementRecord], delta: float) -> ConfidencePlan:
    if not records:
        raise ValueError("no measurement records")
    k = len(records)
    return ConfidencePlan(
        delta=delta, k=k, epsilons=tuple(epsilon(r.shots, k, delta) for r in records)
    )


def _interval_from(record: MeasurementRecord, eps: float) -> IntervalConstraint:
    coeffs = tuple((p, c.real) for p, c in record.observable.items())
    # a-priori box from the coefficient 1-norm (exactly [-1,1] for words);
    # intersecting can only tighten and never breaks validity
    box = sum(abs(c) for _, c in coeffs)
    return IntervalConstraint(
        coeffs=coeffs,
        lower=max(record.mean - eps, -box),
        upper=min(record.mean + eps, box),
    )


def build_intervals(
    records: Sequence[MeasurementRecord], delta: float
) -> list[IntervalConstraint]:
    """One clipped band per record, jointly valid with prob >= 1 - delta."""
    plan = make_plan(records, delta)
    return [_interval_from(r, e) for r, e in zip(records, plan.epsilons)]


def exact_interval(observable: OperatorPoly | PauliString, value: float) -> IntervalConstraint:
    """Zero-width band pinning an observable to its exact value — the
    infinite-shot limit used for dashed asymptote lines."""
    if isinstance(observable, PauliString):
        observable = OperatorPoly.from_string(observable)
    coeffs = tuple((p, c.real) for p, c in observable.items())
    return IntervalConstraint(coeffs=coeffs, lower=value, upper=value)


# ---------------------------------------------------------------------------
# record files — columns (observable string, shots, mean)


def save_records(records: Sequence[MeasurementRecord], path: str | Path) -> None:
    """Write records to .csv (single-word observables only) or .json."""
    path = Path(path)
    if path.suffix == ".csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["observable", "shots", "mean"])
            for r in records:
                p = r.single_string()
                if p is None:
                    raise ValueError(
                        "CSV records hold single Pauli words; use .json for "
                        f"general observables (got {r.observable!r})"
                    )
                writer.writerow([p.label(), r.shots, repr(r.mean)])
    elif path.suffix == ".json":
        payload = [
            {
                "observable": r.observable.to_json_dict(),
                "shots": r.shots,
                "mean": r.mean,
            }
            for r in records
        ]
        path.write_text(json.dumps(payload, indent=1))
    else:
        raise ValueError(f"unknown record format {path.suffix!r} (use .csv/.json)")


def load_records(path: str | Path, n: int | None = None) -> list[MeasurementRecord]:
    """Read records from .csv (needs ``n`` to parse labels) or .json."""
    path = Path(path)
    if path.suffix == ".csv":
        if n is None:
            raise ValueError("qubit count n is required to read CSV records")
        out = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                out.append(
                    MeasurementRecord(
                        observable=OperatorPoly.from_string(
                            from_label(row["observable"], n)
                        ),
                        shots=int(row["shots"]),
                        mean=float(row["mean"]),
                    )
                )
        return out
    if path.suffix == ".json":
        return [
            MeasurementRecord(
                observable=OperatorPoly.from_json_dict(d["observable"]),
                shots=int(d["shots"]),
                mean=float(d["mean"]),
            )
            for d in json.loads(path.read_text())
        ]
    raise ValueError(f"unknown record format {path.suffix!r} (use .csv/.json)")
