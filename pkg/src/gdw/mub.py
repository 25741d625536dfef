"""Real +/-1 mutually unbiased bases in dimension ``4**k`` and the encoding states.

Two explicit 4x4 sign matrices are unbiased; their k-fold Kronecker powers
stay unbiased, giving a pair of bases whose entries are all ``+/-1/sqrt(d)``.
Columns are basis states. Signs are stored bit-packed per column so every
inner product between basis states is an exact integer
``d - 2 * popcount(a ^ b)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np

from gdw.errors import DomainError

__all__ = [
    "MUB4_1",
    "MUB4_2",
    "MAX_K",
    "MubPair",
    "EncodedState",
    "build_mub",
    "encode_optimal",
    "curve_state",
    "measurement_overlap",
    "check_orthogonality",
    "check_unbiasedness",
    "write_basis",
    "read_pm1",
]

MAX_K = 7

# Unnormalized (the 1/2 prefactor is implicit); columns are the basis states.
MUB4_1 = np.array(
    [
        [1, 1, 1, 1],
        [1, -1, 1, -1],
        [1, 1, -1, -1],
        [1, -1, -1, 1],
    ],
    dtype=np.int8,
)
MUB4_2 = np.array(
    [
        [1, -1, 1, 1],
        [1, -1, -1, -1],
        [1, 1, 1, -1],
        [-1, -1, 1, -1],
    ],
    dtype=np.int8,
)
_BASE = (MUB4_1, MUB4_2)
# Gram tables between 4-dim columns: _GRAM[y1][y2][i, j] = col_i(y1) . col_j(y2).
_GRAM = [[(a.T.astype(np.int64) @ b.astype(np.int64)) for b in _BASE] for a in _BASE]


def _pack_columns(signs: np.ndarray) -> np.ndarray:
    # Row j of the result holds column j, bit set where the entry is -1.
    return np.packbits(signs.T < 0, axis=1)


@dataclass(frozen=True, eq=False)
class MubPair:
    """Two ``dim x dim`` sign matrices forming mutually unbiased bases.

    ``packed1``/``packed2`` hold one bit-packed row per basis column. Indices
    into the bases are 1-based throughout the public API.
    """

    k: int
    dim: int
    packed1: np.ndarray
    packed2: np.ndarray

    def _packed(self, y: int) -> np.ndarray:
        if y == 1:
            return self.packed1
        if y == 2:
            return self.packed2
        raise DomainError(f"basis index must be 1 or 2, got {y}")

    def _check_index(self, j) -> None:
        j = np.asarray(j)
        if np.any(j < 1) or np.any(j > self.dim):
            raise DomainError(f"basis-state index outside [1, {self.dim}]: {j}")

    def signs(self, y: int) -> np.ndarray:
        """Full sign matrix of basis ``y`` as ``int8`` (columns are basis states)."""
        bits = np.unpackbits(self._packed(y), axis=1, count=self.dim)
        return (1 - 2 * bits.astype(np.int8)).T.copy()

    @property
    def basis1(self) -> np.ndarray:
        return self.signs(1)

    @property
    def basis2(self) -> np.ndarray:
        return self.signs(2)

    def column(self, y: int, j: int) -> np.ndarray:
        self._check_index(j)
        bits = np.unpackbits(self._packed(y)[j - 1], count=self.dim)
        return 1 - 2 * bits.astype(np.int64)

    def dot(self, y1: int, i: int, y2: int, j: int) -> int:
        """Exact integer inner product of column ``i`` of basis ``y1`` with column ``j`` of ``y2``."""
        self._check_index(i)
        self._check_index(j)
        differ = np.bitwise_count(self._packed(y1)[i - 1] ^ self._packed(y2)[j - 1]).sum()
        return self.dim - 2 * int(differ)

    def dot_many(self, y1, i, y2, j) -> np.ndarray:
        """Vectorized :meth:`dot` using the tensor-product structure.

        The inner product of Kronecker-power columns is the product of the
        4-dim inner products of their base-4 digits, so no column is ever
        materialized.
        """
        y1, i, y2, j = (np.asarray(a, dtype=np.int64) for a in (y1, i, y2, j))
        i0, j0 = i - 1, j - 1
        out = np.ones(np.broadcast(y1, i, y2, j).shape, dtype=np.int64)
        # One factor per base-4 digit; the digit order does not matter for a product.
        for _ in range(self.k):
            di, dj = i0 % 4, j0 % 4
            for a in (1, 2):
                for b in (1, 2):
                    sel = (y1 == a) & (y2 == b)
                    if np.any(sel):
                        out = np.where(sel, out * _GRAM[a - 1][b - 1][di, dj], out)
            i0 //= 4
            j0 //= 4
        return out

    @cached_property
    def sqrt_dim(self) -> int:
        return 2**self.k


@dataclass(frozen=True, eq=False)
class EncodedState:
    """Real state ``(a * m1_x1 + sgn * b * m2_x2) / norm`` with ``m`` the normalized basis states."""

    x1: int
    x2: int
    amplitudes: np.ndarray
    weight1: float = 1.0
    weight2: float = 1.0
    sign: int = 1
    norm: float = 1.0

    def __post_init__(self):
        self.amplitudes.setflags(write=False)


def build_mub(k: int) -> MubPair:
    """Kronecker powers of the two 4x4 sign matrices, dimension ``4**k``."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k!r}")
    if k > MAX_K:
        raise DomainError(f"k={k} exceeds the supported maximum {MAX_K} (dim {4**MAX_K})")
    b1 = reduce(np.kron, [MUB4_1] * k).astype(np.int8)
    b2 = reduce(np.kron, [MUB4_2] * k).astype(np.int8)
    return MubPair(int(k), 4**k, _pack_columns(b1), _pack_columns(b2))


def _superpose(mubs: MubPair, x1: int, x2: int, a: float, b: float) -> EncodedState:
    mubs._check_index(x1)
    mubs._check_index(x2)
    cross = mubs.dot(1, x1, 2, x2)
    sgn = 1 if cross >= 0 else -1
    # |<m1|m2>| = |cross| / dim = 1/sqrt(dim) for unbiased bases.
    norm = math.sqrt(a * a + b * b + 2.0 * a * b * abs(cross) / mubs.dim)
    amps = (a * mubs.column(1, x1) + sgn * b * mubs.column(2, x2)) / (mubs.sqrt_dim * norm)
    return EncodedState(x1, x2, amps, a, b, sgn, norm)


def encode_optimal(mubs: MubPair, x1: int, x2: int) -> EncodedState:
    """Equal superposition of basis-1 state ``x1`` and basis-2 state ``x2``.

    Both target overlaps equal ``(1 + 1/sqrt(dim)) / 2`` and every wrong index
    gets ``(1 - that) / (dim - 1)``.
    """
    return _superpose(mubs, x1, x2, 1.0, 1.0)


def curve_state(mubs: MubPair, x1: int, x2: int, t: float) -> EncodedState:
    """State ``t * m1_x1 + sgn * (1 - t) * m2_x2``, normalized.

    Its overlaps with the two target states lie on the quantum trade-off curve;
    ``t = 0.5`` reproduces :func:`encode_optimal`.
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t!r} outside [0, 1]")
    return _superpose(mubs, x1, x2, t, 1.0 - t)


def measurement_overlap(mubs: MubPair, y: int, j: int, state: EncodedState) -> float:
    """Probability ``|<m_j^y | state>|**2`` from exact integer inner products."""
    mubs._check_index(j)
    c1 = mubs.dot(y, j, 1, state.x1)
    c2 = mubs.dot(y, j, 2, state.x2)
    amp = (state.weight1 * c1 + state.sign * state.weight2 * c2) / (mubs.dim * state.norm)
    return amp * amp


def _int_gram(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # float64 BLAS is exact here: every partial sum is an integer below 2**53.
    return (a.astype(np.float64).T @ b.astype(np.float64)).astype(np.int64)


def check_orthogonality(mubs: MubPair, samples: int | None = None, seed: int = 0) -> bool:
    """Exact integer Gram check: each basis has Gram matrix ``dim * I``.

    With ``samples`` set, random column pairs are checked by popcount instead,
    together with the 4x4 base blocks the bases are built from.
    """
    if samples is None:
        eye = mubs.dim * np.eye(mubs.dim, dtype=np.int64)
        return all(np.array_equal(_int_gram(s, s), eye) for s in (mubs.basis1, mubs.basis2))
    rng = np.random.default_rng(seed)
    for y in (1, 2):
        if not np.array_equal(_GRAM[y - 1][y - 1], 4 * np.eye(4, dtype=np.int64)):
            return False
        i = rng.integers(1, mubs.dim + 1, samples)
        j = rng.integers(1, mubs.dim + 1, samples)
        packed = mubs._packed(y)
        differ = np.bitwise_count(packed[i - 1] ^ packed[j - 1]).sum(axis=1, dtype=np.int64)
        expected = np.where(i == j, mubs.dim, 0)
        if not np.array_equal(mubs.dim - 2 * differ, expected):
            return False
    return True


def check_unbiasedness(mubs: MubPair, samples: int | None = None, seed: int = 0) -> bool:
    """Every cross inner product has absolute value exactly ``sqrt(dim)``.

    With ``samples=None`` all ``dim**2`` pairs are checked via an integer
    matrix product; otherwise ``samples`` random pairs are checked by popcount
    and additionally compared against the base-4 digit factorization.
    """
    target = mubs.sqrt_dim
    if samples is None:
        cross = _int_gram(mubs.basis1, mubs.basis2)
        return bool(np.all(np.abs(cross) == target))
    rng = np.random.default_rng(seed)
    i = rng.integers(1, mubs.dim + 1, samples)
    j = rng.integers(1, mubs.dim + 1, samples)
    # popcount over the packed columns, done in one shot
    differ = np.bitwise_count(mubs.packed1[i - 1] ^ mubs.packed2[j - 1]).sum(axis=1, dtype=np.int64)
    direct = mubs.dim - 2 * differ
    structural = mubs.dot_many(1, i, 2, j)
    return bool(np.all(np.abs(direct) == target) and np.array_equal(direct, structural))


def write_basis(mubs: MubPair, y: int, path, fmt: str = "pm1") -> None:
    """Write basis ``y`` as ``pm1`` ('+'/'-' rows with a ``# mub`` header) or CSV."""
    signs = mubs.signs(y)
    with open(path, "w") as fh:
        if fmt == "pm1":
            fh.write(f"# mub d={mubs.dim} basis={y} k={mubs.k}\n")
            table = np.where(signs > 0, ord("+"), ord("-")).astype(np.uint8)
            for row in table:
                fh.write(row.tobytes().decode() + "\n")
        elif fmt == "csv":
            np.savetxt(fh, signs, fmt="%d", delimiter=",")
        else:
            raise DomainError(f"unknown basis format {fmt!r}")


def read_pm1(path) -> tuple[dict, np.ndarray]:
    """Inverse of :func:`write_basis` with ``fmt="pm1"``."""
    with open(path) as fh:
        header = fh.readline().split()
        meta = dict(item.split("=") for item in header[2:])
        rows = [line.rstrip("\n") for line in fh if line.strip()]
    table = np.array([[1 if c == "+" else -1 for c in row] for row in rows], dtype=np.int8)
    return {k: int(v) for k, v in meta.items()}, table
