"""Simulated measurement data: binomial shot noise around true means.

True means come from one of two sources: a dense small-system state
(ground or steady, via the oracle module) or the analytic dimer rule for
the Majumdar-Ghosh chain, which scales to any even n.

Reproducibility: every (seed, repeat, observable) triple gets its own
PCG64 stream, keyed by SeedSequence(seed, repeat, blake2b(label)).  The
draw for a given observable therefore depends on nothing else in the
run — the same seed and repeat yield the same data no matter which
strategy, delta, or schedule point asks for it.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import oracle
from .confidence import IntervalConstraint, MeasurementRecord, exact_interval
from .pauli import PauliString

__all__ = [
    "stream",
    "simulate_shots",
    "mg_true_moment",
    "ExactStateSource",
    "MGSource",
    "true_moment",
    "sample_records",
    "exact_intervals",
]


def stream(seed: int, repeat: int, label: str) -> np.random.Generator:
    """Independent, portable RNG stream for one observable in one repeat."""
    digest = hashlib.blake2b(label.encode(), digest_size=8).digest()
    key = int.from_bytes(digest, "little")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, repeat, key])))


def simulate_shots(true_mean: float, shots: int, rng: np.random.Generator) -> float:
    """Empirical mean of N projective +-1 outcomes:
    k ~ Binomial(N, (1 + mean)/2), returns 2k/N - 1."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if abs(true_mean) > 1.0 + 1e-9:
        raise ValueError(f"true mean {true_mean} outside [-1, 1]")
    p = min(max((1.0 + true_mean) / 2.0, 0.0), 1.0)
    k = rng.binomial(shots, p)
    return 2.0 * k / shots - 1.0


def mg_true_moment(p: PauliString, n: int | None = None, shifted: bool = False) -> float:
    """Expectation of a Pauli word in the Majumdar-Ghosh dimer state with
    singlets on (1,2),(3,4),... (1-based; ``shifted`` uses the degenerate
    partner covering (2,3),(4,5),...,(n,1)).

    A singlet gives -1 for an equal-letter pair on its bond and 0 for any
    other non-trivial pattern, so the value is (-1)^(m/2) when the word
    splits into equal-letter dimer-bond pairs, else 0.
    """
    if n is None:
        n = p.n
    elif n != p.n:
        raise ValueError(f"string is on {p.n} qubits, source has {n}")
    if n % 2:
        raise ValueError(f"dimer covering needs even n, got {n}")
    value = 1.0
    off = 1 if shifted else 0
    for b in range(n // 2):
        i = (2 * b + off) % n
        j = (2 * b + 1 + off) % n
        a, c = p.letter(i), p.letter(j)
        if a == "I" and c == "I":
            continue
        if a != c:
            return 0.0
        value = -value
    return value


@dataclass(frozen=True)
class ExactStateSource:
    """True means from a dense state (kind ``exact_state``)."""

    state: oracle.DenseState
    seed: int = 0

    @property
    def n(self) -> int:
        return self.state.n

    def true_moment(self, p: PauliString) -> float:
        val = self.state.expectation(p)
        if abs(val) > 1.0 + 1e-9:
            raise ValueError(f"oracle moment {val} outside [-1, 1]")
        return min(max(val, -1.0), 1.0)


@dataclass(frozen=True)
class MGSource:
    """Analytic Majumdar-Ghosh dimer moments (kind ``analytic_mg``)."""

    n: int
    seed: int = 0
    shifted: bool = False

    def true_moment(self, p: PauliString) -> float:
        return mg_true_moment(p, self.n, shifted=self.shifted)


def true_moment(source, p: PauliString) -> float:
    if p.n != source.n:
        raise ValueError(f"string is on {p.n} qubits, source has {source.n}")
    return source.true_moment(p)


def sample_records(
    source,
    strings: list[PauliString],
    shots_each: int,
    *,
    seed: int,
    repeat: int = 0,
) -> list[MeasurementRecord]:
    """Measure each string with ``shots_each`` shots on its own stream."""
    out = []
    for p in strings:
        rng = stream(seed, repeat, p.label())
        mean = simulate_shots(true_moment(source, p), shots_each, rng)
        out.append(MeasurementRecord(observable=p, shots=shots_each, mean=mean))
    return out


def exact_intervals(source, strings: list[PauliString]) -> list[IntervalConstraint]:
    """Zero-width bands at the true means — the infinite-shot limit."""
    return [exact_interval(p, true_moment(source, p)) for p in strings]
