"""Product structures of a composite dimension.

A product structure splits a ``d``-dimensional system into subsystems of
dimensions ``d_1 * ... * d_r = d``, each either quantum or classical.
Structures are rendered as ``"Q512*C2"``.
"""

from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass
from functools import cached_property

from gdw.errors import InvalidDimensionError, StructureParseError

__all__ = [
    "Kind",
    "Factor",
    "ProductStructure",
    "Filter",
    "enumerate_structures",
    "multiplicative_partitions",
    "parse_structure",
]


class Kind(str, enum.Enum):
    QUANTUM = "Q"
    CLASSICAL = "C"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str) and value.upper() in ("Q", "C"):
            return cls(value.upper())
        return None


class Filter(str, enum.Enum):
    ALL = "all"
    QUANTUM_ONLY = "quantum-only"


@dataclass(frozen=True)
class Factor:
    dim: int
    kind: Kind

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidDimensionError(f"factor dimension must be >= 2, got {self.dim}")

    @property
    def is_quantum(self) -> bool:
        return self.kind is Kind.QUANTUM

    def sort_key(self) -> tuple[int, int]:
        return (-self.dim, 0 if self.is_quantum else 1)

    def __str__(self) -> str:
        return f"{self.kind.value}{self.dim}"


@dataclass(frozen=True)
class ProductStructure:
    """A labeled multiset of subsystem dimensions, stored in canonical order.

    Canonical order is dimension descending, quantum before classical, so two
    structures compare equal exactly when they are the same labeled multiset.
    """

    factors: tuple[Factor, ...]
    total_dim: int

    def __post_init__(self):
        if not self.factors:
            raise InvalidDimensionError("a product structure needs at least one factor")
        ordered = tuple(sorted(self.factors, key=Factor.sort_key))
        object.__setattr__(self, "factors", ordered)
        product = math.prod(f.dim for f in ordered)
        if product != self.total_dim:
            raise InvalidDimensionError(
                f"factor dimensions multiply to {product}, not {self.total_dim}"
            )

    @classmethod
    def of(cls, *factors: Factor | tuple[int, Kind | str]) -> ProductStructure:
        fs = tuple(f if isinstance(f, Factor) else Factor(f[0], Kind(f[1])) for f in factors)
        return cls(fs, math.prod(f.dim for f in fs))

    @property
    def r(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def is_fully_quantum(self) -> bool:
        return all(f.is_quantum for f in self.factors)

    @cached_property
    def sort_key(self) -> tuple:
        # r ascending, dims descending lexicographically, then Q before C.
        return (
            self.r,
            tuple(-f.dim for f in self.factors),
            tuple(0 if f.is_quantum else 1 for f in self.factors),
        )

    def render(self) -> str:
        return "*".join(str(f) for f in self.factors)

    def __str__(self) -> str:
        return self.render()


def multiplicative_partitions(n: int, largest: int | None = None) -> list[tuple[int, ...]]:
    """All non-increasing tuples of integers >= 2 whose product is ``n``.

    >>> multiplicative_partitions(12)
    [(12,), (6, 2), (4, 3), (3, 2, 2)]
    """
    if largest is None:
        largest = n
    if n == 1:
        return [()]
    out = []
    for first in range(min(n, largest), 1, -1):
        if n % first == 0:
            out.extend((first,) + rest for rest in multiplicative_partitions(n // first, first))
    return out


def _labelings(dims: tuple[int, ...]) -> list[tuple[Factor, ...]]:
    # Within a run of equal dims only the number of quantum factors matters,
    # which gives multiset-distinct labelings without a dedup pass.
    per_group = []
    for dim, group in itertools.groupby(dims):
        m = len(tuple(group))
        per_group.append(
            [
                (Factor(dim, Kind.QUANTUM),) * nq + (Factor(dim, Kind.CLASSICAL),) * (m - nq)
                for nq in range(m, -1, -1)
            ]
        )
    return [sum(combo, ()) for combo in itertools.product(*per_group)]


def enumerate_structures(d: int, filter: Filter | str = Filter.ALL) -> list[ProductStructure]:
    """Every product structure of ``d``, sorted canonically.

    With ``Filter.QUANTUM_ONLY`` the count equals the number of multiplicative
    partitions of ``d`` (42 for ``d = 1024``).
    """
    if not isinstance(d, int) or isinstance(d, bool) or d < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {d!r}")
    filter = Filter(filter)
    out = []
    for dims in multiplicative_partitions(d):
        if filter is Filter.QUANTUM_ONLY:
            labelings = [tuple(Factor(x, Kind.QUANTUM) for x in dims)]
        else:
            labelings = _labelings(dims)
        out.extend(ProductStructure(fs, d) for fs in labelings)
    out.sort(key=lambda s: s.sort_key)
    return out


_TOKEN = re.compile(r"([QC])(\d+)")


def parse_structure(text: str) -> ProductStructure:
    """Parse ``factor ("*" factor)*`` with ``factor = ("Q"|"C") integer``.

    Whitespace around factors is ignored. The result is canonicalized, so
    ``"C2*Q2"`` parses to ``Q2*C2``.
    """
    factors = []
    pos = 0
    for i, chunk in enumerate(text.split("*")):
        if i:
            pos += 1
        lead = len(chunk) - len(chunk.lstrip())
        token = chunk.strip()
        offset = len(text[: pos + lead].encode())
        m = _TOKEN.fullmatch(token)
        if not m:
            raise StructureParseError(f"malformed factor {token!r}", offset)
        dim = int(m.group(2))
        if dim < 2:
            raise StructureParseError(f"factor dimension must be >= 2, got {token!r}", offset)
        factors.append(Factor(dim, Kind(m.group(1))))
        pos += len(chunk)
    return ProductStructure(tuple(factors), math.prod(f.dim for f in factors))
