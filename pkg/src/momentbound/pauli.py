"""Exact algebra of n-qubit Pauli strings and real/complex Pauli polynomials.

A Pauli string is stored in binary symplectic form: two n-bit integers
``x`` and ``z`` with the convention

    P(x, z) = i^{popcount(x & z)} * X^x * Z^z,

i.e. the phase factor makes every generated string one of the 4^n
Hermitian Pauli words (tensor products of I, X, Y, Z with a + sign).
Site j uses bit j of ``x``/``z``:

    (x_j, z_j) = (0,0) -> I,  (1,0) -> X,  (1,1) -> Y,  (0,1) -> Z.

Products of Hermitian words are Hermitian words up to a fourth root of
unity, so all group arithmetic is exact integer arithmetic; no floating
point enters until polynomial coefficients do.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

__all__ = [
    "Phase",
    "PauliString",
    "PhasedString",
    "OperatorPoly",
    "multiply",
    "commutator",
    "anticommutator",
    "identity",
    "single_site",
    "from_label",
    "all_strings",
    "strings_up_to_weight",
    "canonical_key",
]

_LETTERS = "IXYZ"

# coefficients this small after arithmetic are treated as exact cancellations
_DROP_TOL = 1e-14


@dataclass(frozen=True, slots=True)
class Phase:
    """A fourth root of unity i**k with k in {0, 1, 2, 3}."""

    k: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", self.k % 4)

    def __mul__(self, other: "Phase") -> "Phase":
        return Phase(self.k + other.k)

    def conjugate(self) -> "Phase":
        return Phase(-self.k)

    @property
    def value(self) -> complex:
        return (1 + 0j, 1j, -1 + 0j, -1j)[self.k]

    @property
    def is_real(self) -> bool:
        return self.k % 2 == 0

    def times(self, c: complex) -> complex:
        """Multiply a scalar by i**k without rounding error."""
        if self.k == 0:
            return c
        c = complex(c)
        if self.k == 1:
            return complex(-c.imag, c.real)
        if self.k == 2:
            return complex(-c.real, -c.imag)
        return complex(c.imag, -c.real)

    def __repr__(self) -> str:
        return ("+1", "+i", "-1", "-i")[self.k]


@dataclass(frozen=True, slots=True)
class PauliString:
    """Hermitian n-qubit Pauli word in symplectic (x, z) bitmask form."""

    n: int
    x: int
    z: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need at least one qubit, got n={self.n}")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError(
                f"bitmask out of range for n={self.n}: x={self.x:#x} z={self.z:#x}"
            )

    # -- per-site structure -------------------------------------------------

    def letter(self, site: int) -> str:
        """Single-site letter at ``site`` (0-based)."""
        xb = (self.x >> site) & 1
        zb = (self.z >> site) & 1
        return _LETTERS[2 * zb + (xb ^ zb) if not (xb and zb) else 2]

    def letters(self) -> str:
        """All n letters, site 0 first, e.g. ``'IXZY'``."""
        return "".join(self.letter(j) for j in range(self.n))

    @property
    def weight(self) -> int:
        """Number of non-identity sites."""
        return (self.x | self.z).bit_count()

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def support(self) -> tuple[int, ...]:
        s = self.x | self.z
        return tuple(j for j in range(self.n) if (s >> j) & 1)

    # -- algebraic predicates -----------------------------------------------

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise ValueError(f"qubit-count mismatch: {self.n} vs {other.n}")
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    # -- ordering & text form -----------------------------------------------

    def sort_key(self) -> int:
        """Site-major lexicographic key with per-site order I < X < Y < Z."""
        key = 0
        for j in range(self.n):
            xb = (self.x >> j) & 1
            zb = (self.z >> j) & 1
            # I=0, X=1, Y=2, Z=3
            code = 2 * zb + (xb ^ zb) if not (xb and zb) else 2
            key = key * 4 + code
        return key

    def __lt__(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise ValueError(f"qubit-count mismatch: {self.n} vs {other.n}")
        return self.sort_key() < other.sort_key()

    def label(self) -> str:
        """Compact text form: letter + 1-based site for each non-identity
        site, space separated; the identity is the single letter ``'I'``."""
        parts = [
            f"{self.letter(j)}{j + 1}" for j in range(self.n) if self.letter(j) != "I"
        ]
        return " ".join(parts) if parts else "I"

    def __repr__(self) -> str:
        return f"PauliString({self.label()!r}, n={self.n})"


@dataclass(frozen=True, slots=True)
class PhasedString:
    """A Pauli word together with a fourth-root-of-unity prefactor."""

    phase: Phase
    string: PauliString


# ---------------------------------------------------------------------------
# constructors


def identity(n: int) -> PauliString:
    return PauliString(n, 0, 0)


def single_site(n: int, site: int, letter: str) -> PauliString:
    """The word with ``letter`` on ``site`` (0-based) and I elsewhere."""
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for n={n}")
    try:
        code = _LETTERS.index(letter.upper())
    except ValueError:
        raise ValueError(f"unknown Pauli letter {letter!r}") from None
    x = (code in (1, 2)) << site
    z = (code in (2, 3)) << site
    return PauliString(n, x, z)


def from_letters(word: str) -> PauliString:
    """Build from a dense letter string like ``'IXZY'`` (site 0 first)."""
    n = len(word)
    x = z = 0
    for j, ch in enumerate(word.upper()):
        if ch == "I":
            continue
        if ch == "X":
            x |= 1 << j
        elif ch == "Y":
            x |= 1 << j
            z |= 1 << j
        elif ch == "Z":
            z |= 1 << j
        else:
            raise ValueError(f"unknown Pauli letter {ch!r} in {word!r}")
    return PauliString(n, x, z)


def from_label(label: str, n: int) -> PauliString:
    """Parse the compact text form produced by :meth:`PauliString.label`.

    ``'X1 Y3'`` with ``n=4`` gives X on site 0, Y on site 2.  ``'I'``
    (or the empty string) is the identity.
    """
    label = label.strip()
    x = z = 0
    if label and label != "I":
        for part in label.split():
            ch = part[0].upper()
            if ch not in "XYZ" or len(part) < 2:
                raise ValueError(f"bad factor {part!r} in label {label!r}")
            try:
                site = int(part[1:]) - 1
            except ValueError:
                raise ValueError(f"bad site index in {part!r}") from None
            if not 0 <= site < n:
                raise ValueError(f"site {site + 1} out of range for n={n}")
            if (x >> site) & 1 or (z >> site) & 1:
                raise ValueError(f"site {site + 1} repeated in label {label!r}")
            if ch in "XY":
                x |= 1 << site
            if ch in "YZ":
                z |= 1 << site
    return PauliString(n, x, z)


def all_strings(n: int) -> list[PauliString]:
    """All 4^n words in canonical order (identity first)."""
    out = [
        PauliString(n, x, z) for x in range(1 << n) for z in range(1 << n)
    ]
    out.sort(key=PauliString.sort_key)
    return out


def strings_up_to_weight(n: int, w: int) -> list[PauliString]:
    """All words of weight <= w in canonical order."""
    from itertools import combinations, product

    out = [identity(n)]
    for k in range(1, min(w, n) + 1):
        for sites in combinations(range(n), k):
            for letters in product("XYZ", repeat=k):
                x = z = 0
                for site, ch in zip(sites, letters):
                    if ch in "XY":
                        x |= 1 << site
                    if ch in "YZ":
                        z |= 1 << site
                out.append(PauliString(n, x, z))
    out.sort(key=PauliString.sort_key)
    return out


def canonical_key(p: PauliString) -> int:
    return p.sort_key()


# ---------------------------------------------------------------------------
# group arithmetic


def multiply(a: PauliString, b: PauliString) -> PhasedString:
    """Exact product a*b = i^k c of two Hermitian Pauli words.

    With the symplectic phase convention P(x,z) = i^{|x&z|} X^x Z^z the
    exponent is

        k = |xa & za| + |xb & zb| - |xc & zc| + 2|za & xb|   (mod 4),

    where (xc, zc) = (xa^xb, za^zb); the 2|za & xb| term counts the Z-X
    swaps needed to reorder X^xb past Z^za.
    """
    if a.n != b.n:
        raise ValueError(f"qubit-count mismatch: {a.n} vs {b.n}")
    x = a.x ^ b.x
    z = a.z ^ b.z
    k = (
        (a.x & a.z).bit_count()
        + (b.x & b.z).bit_count()
        - (x & z).bit_count()
        + 2 * (a.z & b.x).bit_count()
    )
    return PhasedString(Phase(k), PauliString(a.n, x, z))


# ---------------------------------------------------------------------------
# polynomials


class OperatorPoly:
    """Finite linear combination of Pauli words with complex coefficients.

    Internally a dict keyed by :class:`PauliString`, kept in canonical
    order with exact-zero terms dropped, so equal operators compare equal
    term by term.
    """

    __slots__ = ("n", "_terms")

    def __init__(
        self,
        n: int,
        terms: Mapping[PauliString, complex] | Iterable[tuple[PauliString, complex]] = (),
    ):
        if n < 1:
            raise ValueError(f"need at least one qubit, got n={n}")
        self.n = n
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[PauliString, complex] = {}
        for p, c in items:
            if p.n != n:
                raise ValueError(f"term on {p.n} qubits in {n}-qubit polynomial")
            acc[p] = acc.get(p, 0j) + complex(c)
        self._terms = {
            p: acc[p]
            for p in sorted(acc, key=PauliString.sort_key)
            if abs(acc[p]) > _DROP_TOL
        }

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "OperatorPoly":
        return cls(n)

    @classmethod
    def from_string(cls, p: PauliString, coeff: complex = 1.0) -> "OperatorPoly":
        return cls(p.n, [(p, coeff)])

    @classmethod
    def constant(cls, n: int, c: complex) -> "OperatorPoly":
        return cls(n, [(identity(n), c)])

    # -- inspection -------------------------------------------------------

    def items(self) -> Iterator[tuple[PauliString, complex]]:
        return iter(self._terms.items())

    def strings(self) -> list[PauliString]:
        return list(self._terms)

    def coeff(self, p: PauliString) -> complex:
        return self._terms.get(p, 0j)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def one_norm(self) -> float:
        """Sum of coefficient magnitudes; upper-bounds the operator norm."""
        return sum(abs(c) for c in self._terms.values())

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def real_coeffs(self, tol: float = 1e-10) -> dict[PauliString, float]:
        """Coefficient dict as floats; raises if any has an imaginary part."""
        for p, c in self._terms.items():
            if abs(c.imag) > tol:
                raise ValueError(
                    f"non-Hermitian term {p.label()}: coefficient {c}"
                )
        return {p: c.real for p, c in self._terms.items()}

    # -- ring operations --------------------------------------------------

    def _require_same_n(self, other: "OperatorPoly") -> None:
        if self.n != other.n:
            raise ValueError(f"qubit-count mismatch: {self.n} vs {other.n}")

    def __add__(self, other: "OperatorPoly") -> "OperatorPoly":
        self._require_same_n(other)
        acc = dict(self._terms)
        for p, c in other._terms.items():
            acc[p] = acc.get(p, 0j) + c
        return OperatorPoly(self.n, acc)

    def __sub__(self, other: "OperatorPoly") -> "OperatorPoly":
        return self + (-1.0) * other

    def __neg__(self) -> "OperatorPoly":
        return (-1.0) * self

    def __rmul__(self, scalar: complex) -> "OperatorPoly":
        return OperatorPoly(
            self.n, [(p, scalar * c) for p, c in self._terms.items()]
        )

    def __mul__(self, scalar: complex) -> "OperatorPoly":
        return self.__rmul__(scalar)

    def __matmul__(self, other: "OperatorPoly") -> "OperatorPoly":
        """Operator product, expanded back into Pauli words."""
        self._require_same_n(other)
        acc: dict[PauliString, complex] = {}
        for pa, ca in self._terms.items():
            for pb, cb in other._terms.items():
                ps = multiply(pa, pb)
                acc[ps.string] = acc.get(ps.string, 0j) + ps.phase.times(ca * cb)
        return OperatorPoly(self.n, acc)

    def dagger(self) -> "OperatorPoly":
        return OperatorPoly(
            self.n, [(p, c.conjugate()) for p, c in self._terms.items()]
        )

    # -- text / JSON form ---------------------------------------------------

    def __repr__(self) -> str:
        if not self._terms:
            return f"OperatorPoly.zero({self.n})"
        parts = []
        for p, c in self._terms.items():
            cs = f"{c.real:g}" if abs(c.imag) <= _DROP_TOL else f"({c:g})"
            parts.append(f"{cs}*{p.label()}")
        body = " + ".join(parts)
        if len(body) > 120:
            body = body[:117] + "..."
        return f"OperatorPoly({self.n}: {body})"

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                [p.label(), c.real, c.imag] for p, c in self._terms.items()
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "OperatorPoly":
        n = int(d["n"])
        return cls(
            n,
            [
                (from_label(lbl, n), complex(re, im))
                for lbl, re, im in d["terms"]
            ],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, s: str) -> "OperatorPoly":
        return cls.from_json_dict(json.loads(s))


def commutator(a: OperatorPoly, b: OperatorPoly) -> OperatorPoly:
    """[a, b] = ab - ba, cancelling commuting word pairs exactly."""
    a._require_same_n(b)
    acc: dict[PauliString, complex] = {}
    for pa, ca in a._terms.items():
        for pb, cb in b._terms.items():
            fwd = multiply(pa, pb)
            if fwd.phase.k == multiply(pb, pa).phase.k:
                continue
            # anticommuting words: ab - ba = 2 ab
            acc[fwd.string] = acc.get(fwd.string, 0j) + fwd.phase.times(2 * ca * cb)
    return OperatorPoly(a.n, acc)


def anticommutator(a: OperatorPoly, b: OperatorPoly) -> OperatorPoly:
    """{a, b} = ab + ba."""
    a._require_same_n(b)
    acc: dict[PauliString, complex] = {}
    for pa, ca in a._terms.items():
        for pb, cb in b._terms.items():
            fwd = multiply(pa, pb)
            if fwd.phase.k != multiply(pb, pa).phase.k:
                continue
            acc[fwd.string] = acc.get(fwd.string, 0j) + fwd.phase.times(2 * ca * cb)
    return OperatorPoly(a.n, acc)
