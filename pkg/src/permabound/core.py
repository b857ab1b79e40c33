"""Foundational types: complex matrices, bitmask subsets, column partitions.

Indices are 0-based everywhere in the library. A subset of ``{0, ..., n-1}``
is a bitmask ``int`` wrapped in :class:`IndexSubset`; hot paths work on the
raw masks or on the numpy tables returned by :func:`subset_masks`.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_UNIVERSE = 63


class PermaboundError(ValueError):
    """Base class for all library errors."""


class InvalidCardinalityError(PermaboundError):
    pass


class ShapeError(PermaboundError):
    """Matrix, subset or partition shapes do not fit together."""


class SizeExceededError(PermaboundError):
    """Input is larger than the configured exact-computation cap or budget."""


class ContainmentError(PermaboundError):
    pass


class ParseError(PermaboundError):
    pass


# --------------------------------------------------------------------------
# matrices


def as_complex_matrix(z, *, name: str = "matrix") -> np.ndarray:
    """Validate ``z`` and return it as a C-contiguous 2-D complex128 array."""
    a = np.asarray(z)
    if a.ndim != 2:
        if a.size == 0 and a.ndim == 1:
            a = a.reshape(0, 0)
        else:
            raise ShapeError(f"{name} must be 2-dimensional, got shape {a.shape}")
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if not np.all(np.isfinite(a)):
        raise ShapeError(f"{name} has non-finite entries")
    return a


def as_square_matrix(z, *, name: str = "matrix") -> np.ndarray:
    a = as_complex_matrix(z, name=name)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got {a.shape[0]}x{a.shape[1]}")
    return a


# --------------------------------------------------------------------------
# subsets


@dataclass(frozen=True)
class IndexSubset:
    """A subset of ``{0, ..., universe_size - 1}`` stored as a bitmask."""

    bits: int
    universe_size: int

    def __post_init__(self):
        if not 0 <= self.universe_size <= MAX_UNIVERSE:
            raise InvalidCardinalityError(
                f"universe size must be in [0, {MAX_UNIVERSE}], got {self.universe_size}"
            )
        if self.bits < 0 or self.bits >> self.universe_size:
            raise ShapeError(
                f"mask {self.bits:#x} has bits outside a universe of size {self.universe_size}"
            )

    @classmethod
    def from_indices(cls, indices: Iterable[int], universe_size: int) -> "IndexSubset":
        bits = 0
        for i in indices:
            if not 0 <= i < universe_size:
                raise ShapeError(f"index {i} outside universe of size {universe_size}")
            bits |= 1 << i
        return cls(bits, universe_size)

    @classmethod
    def full(cls, universe_size: int) -> "IndexSubset":
        return cls((1 << universe_size) - 1, universe_size)

    @classmethod
    def empty(cls, universe_size: int) -> "IndexSubset":
        return cls(0, universe_size)

    @property
    def indices(self) -> tuple[int, ...]:
        return mask_indices(self.bits)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, i: int) -> bool:
        return 0 <= i < self.universe_size and bool(self.bits >> i & 1)

    def issubset(self, other: "IndexSubset") -> bool:
        return self.bits & ~other.bits == 0

    def complement(self) -> "IndexSubset":
        return IndexSubset(((1 << self.universe_size) - 1) & ~self.bits, self.universe_size)

    def _check(self, other: "IndexSubset") -> None:
        if self.universe_size != other.universe_size:
            raise ShapeError("subsets live in different universes")

    def __or__(self, other: "IndexSubset") -> "IndexSubset":
        self._check(other)
        return IndexSubset(self.bits | other.bits, self.universe_size)

    def __and__(self, other: "IndexSubset") -> "IndexSubset":
        self._check(other)
        return IndexSubset(self.bits & other.bits, self.universe_size)

    def __sub__(self, other: "IndexSubset") -> "IndexSubset":
        self._check(other)
        return IndexSubset(self.bits & ~other.bits, self.universe_size)

    def __repr__(self) -> str:
        return f"IndexSubset({set(self.indices) or '{}'}, n={self.universe_size})"


def popcount(mask: int) -> int:
    return int(mask).bit_count()


@lru_cache(maxsize=4096)
def mask_indices(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _as_mask(s, universe_size: int | None = None) -> int:
    """Accept an IndexSubset, a raw mask or an iterable of indices."""
    if isinstance(s, IndexSubset):
        if universe_size is not None and s.bits >> universe_size:
            raise ShapeError(f"{s!r} exceeds universe of size {universe_size}")
        return s.bits
    if isinstance(s, (int, np.integer)):
        m = int(s)
    else:
        m = 0
        for i in s:
            if i < 0:
                raise ShapeError(f"negative index {i}")
            m |= 1 << int(i)
    if universe_size is not None and m >> universe_size:
        raise ShapeError(f"subset {mask_indices(m)} exceeds universe of size {universe_size}")
    return m


def _check_nk(n: int, k: int) -> None:
    if not 0 <= n <= MAX_UNIVERSE:
        raise InvalidCardinalityError(f"n must be in [0, {MAX_UNIVERSE}], got {n}")
    if not 0 <= k <= n:
        raise InvalidCardinalityError(f"cardinality k={k} must satisfy 0 <= k <= n={n}")


def iter_masks(n: int, k: int) -> Iterator[int]:
    """Yield the k-subsets of ``{0..n-1}`` as ascending bitmasks (Gosper's hack)."""
    _check_nk(n, k)
    if k == 0:
        yield 0
        return
    x = (1 << k) - 1
    limit = 1 << n
    while x < limit:
        yield x
        c = x & -x
        r = x + c
        x = (((r ^ x) >> 2) // c) | r


def iter_subsets(n: int, k: int) -> Iterator[IndexSubset]:
    """All k-subsets of an n-element universe, ascending by mask value.

    For fixed k, ascending mask order is colexicographic order, so the
    position of a subset in this stream is its :func:`subset_rank`.
    """
    for x in iter_masks(n, k):
        yield IndexSubset(x, n)


@lru_cache(maxsize=1024)
def subset_masks(n: int, k: int) -> np.ndarray:
    """The masks of :func:`iter_masks` as a read-only int64 array."""
    a = np.fromiter(iter_masks(n, k), dtype=np.int64, count=comb(n, k))
    a.flags.writeable = False
    return a


@lru_cache(maxsize=1024)
def subset_members(n: int, k: int) -> np.ndarray:
    """``(C(n,k), k)`` array of sorted member indices, rows in colex order."""
    masks = subset_masks(n, k)
    out = np.empty((len(masks), k), dtype=np.intp)
    for row, m in enumerate(masks.tolist()):
        out[row] = mask_indices(m)
    out.flags.writeable = False
    return out


def subset_rank(mask: int) -> int:
    """Colexicographic rank of a subset among subsets of the same size."""
    r = 0
    for i, e in enumerate(mask_indices(int(mask))):
        r += comb(e, i + 1)
    return r


@lru_cache(maxsize=256)
def rank_lookup(n: int) -> np.ndarray:
    """Array mapping every mask in ``[0, 2^n)`` to its colex rank within its size class."""
    if n > 24:
        raise SizeExceededError("rank lookup tables are limited to n <= 24")
    table = np.zeros(1 << n, dtype=np.int64)
    for k in range(n + 1):
        table[subset_masks(n, k)] = np.arange(comb(n, k))
    table.flags.writeable = False
    return table


# --------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class ColumnPartition:
    """Ordered pairwise-disjoint nonempty blocks whose union is ``universe``."""

    blocks: tuple[IndexSubset, ...]
    universe: IndexSubset

    def __post_init__(self):
        seen = 0
        for b in self.blocks:
            if b.universe_size != self.universe.universe_size:
                raise ShapeError("blocks and universe must share a universe size")
            if b.bits == 0:
                raise ShapeError("partition blocks must be nonempty")
            if b.bits & seen:
                raise ShapeError("partition blocks must be pairwise disjoint")
            seen |= b.bits
        if seen != self.universe.bits:
            raise ShapeError("partition blocks must cover the universe exactly")

    @classmethod
    def from_groups(cls, groups: Sequence[Iterable[int]], n: int) -> "ColumnPartition":
        blocks = tuple(IndexSubset.from_indices(g, n) for g in groups)
        universe = 0
        for b in blocks:
            universe |= b.bits
        return cls(blocks, IndexSubset(universe, n))

    @classmethod
    def consecutive(cls, sizes: Sequence[int], n: int | None = None,
                    columns: Sequence[int] | None = None) -> "ColumnPartition":
        """Blocks of the given sizes taken in order from ``columns`` (default ``0..sum-1``)."""
        sizes = [int(s) for s in sizes]
        if any(s <= 0 for s in sizes):
            raise ShapeError(f"block sizes must be positive, got {sizes}")
        if columns is None:
            columns = range(sum(sizes))
        columns = list(columns)
        if sum(sizes) != len(columns):
            raise ShapeError(f"block sizes {sizes} do not sum to {len(columns)}")
        if n is None:
            n = max(columns, default=-1) + 1
        groups, pos = [], 0
        for s in sizes:
            groups.append(columns[pos:pos + s])
            pos += s
        return cls.from_groups(groups, n)

    @classmethod
    def singletons(cls, n: int) -> "ColumnPartition":
        return cls.consecutive([1] * n, n)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)


def compositions(total: int) -> Iterator[tuple[int, ...]]:
    """All ordered tuples of positive integers summing to ``total``."""
    if total == 0:
        yield ()
        return
    for cuts in range(1 << (total - 1)):
        parts, last = [], 0
        for i in range(total - 1):
            if cuts >> i & 1:
                parts.append(i + 1 - last)
                last = i + 1
        parts.append(total - last)
        yield tuple(parts)


# --------------------------------------------------------------------------
# exact arithmetic


def binomial_exact(x, k: int) -> Fraction:
    """Generalized binomial ``x (x-1) ... (x-k+1) / k!`` for rational ``x``."""
    if k < 0:
        raise InvalidCardinalityError(f"k must be nonnegative, got {k}")
    x = Fraction(x)
    if x.denominator == 1:
        return Fraction(_int_binomial(x.numerator, k))
    num = Fraction(1)
    for i in range(k):
        num *= x - i
    return num / _factorial(k)


@lru_cache(maxsize=65536)
def _int_binomial(x: int, k: int) -> int:
    if x >= 0:
        return comb(x, k)
    # C(-a, k) = (-1)^k C(a + k - 1, k)
    return (-1) ** k * comb(-x + k - 1, k)


@lru_cache(maxsize=256)
def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


# --------------------------------------------------------------------------
# submatrices


def submatrix(z, rows, cols) -> np.ndarray:
    """``Z[rows, cols]`` keeping ascending index order on both axes."""
    a = as_complex_matrix(z)
    r = _as_mask(rows, a.shape[0])
    c = _as_mask(cols, a.shape[1])
    ri, ci = list(mask_indices(r)), list(mask_indices(c))
    return a[np.ix_(ri, ci)] if ri and ci else np.zeros((len(ri), len(ci)), dtype=np.complex128)


# --------------------------------------------------------------------------
# matrix files

def _parse_token(tok: str) -> complex:
    t = "".join(tok.split())
    if not t:
        raise ParseError("empty matrix entry")
    if t[-1] in "iIjJ":
        t = t[:-1] + "j"
    try:
        v = complex(t)
    except ValueError:
        raise ParseError(f"cannot parse matrix entry {tok!r}") from None
    if not (np.isfinite(v.real) and np.isfinite(v.imag)):
        raise ParseError(f"non-finite matrix entry {tok!r}")
    return v


def parse_matrix_csv(text: str) -> np.ndarray:
    """Rows of comma-separated ``a+bi`` tokens, one matrix row per line."""
    rows = []
    for line in csv.reader(io.StringIO(text)):
        if not line or all(not c.strip() for c in line):
            continue
        rows.append([_parse_token(c) for c in line])
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ParseError("ragged CSV matrix")
    return np.array(rows, dtype=np.complex128).reshape(len(rows), len(rows[0]) if rows else 0)


def parse_matrix_json(text: str) -> np.ndarray:
    try:
        doc = json.loads(text)
        n, m, entries = int(doc["rows"]), int(doc["cols"]), doc["entries"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"bad matrix JSON: {exc}") from None
    if len(entries) != n * m:
        raise ParseError(f"expected {n * m} entries, got {len(entries)}")
    vals = np.empty(n * m, dtype=np.complex128)
    for i, e in enumerate(entries):
        try:
            re_, im = float(e[0]), float(e[1])
        except (TypeError, ValueError, IndexError):
            raise ParseError(f"entry {i} is not a [re, im] pair") from None
        if not (np.isfinite(re_) and np.isfinite(im)):
            raise ParseError(f"entry {i} is not finite")
        vals[i] = complex(re_, im)
    return vals.reshape(n, m)


def load_matrix(path) -> np.ndarray:
    """Load a matrix from a ``.json`` file or a CSV file of complex tokens."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if str(path).lower().endswith(".json") or text.lstrip().startswith("{"):
        return parse_matrix_json(text)
    return parse_matrix_csv(text)


def matrix_to_json(z) -> str:
    a = as_complex_matrix(z)
    return json.dumps({
        "rows": a.shape[0],
        "cols": a.shape[1],
        "entries": [[float(v.real), float(v.imag)] for v in a.ravel()],
    })
