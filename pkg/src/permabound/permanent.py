"""Exact permanents: brute-force oracle, Gray-code Ryser, submatrix permanents.

The Ryser kernel comes from the compiled extension ``permabound._ryser`` when
it is importable and from :mod:`permabound._ryser_py` otherwise. Set
``PERMABOUND_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .core import (
    ContainmentError,
    InvalidCardinalityError,
    ShapeError,
    SizeExceededError,
    _as_mask,
    as_complex_matrix,
    as_square_matrix,
    iter_masks,
    mask_indices,
    popcount,
    rank_lookup,
    subset_members,
)

if os.environ.get("PERMABOUND_PURE_PYTHON", "") not in ("", "0"):
    from ._ryser_py import ryser_range as _ryser_range
    BACKEND = "python"
else:
    try:
        from ._ryser import ryser_range as _ryser_range
        BACKEND = "cython"
    except ImportError:
        from ._ryser_py import ryser_range as _ryser_range
        BACKEND = "python"

NAIVE_CAP = 10
DEFAULT_EXACT_CAP = 30

# the chunk plan depends only on n, never on the worker count, and chunk
# results are reduced in chunk order: output is identical for any workers
_MAX_CHUNK_BITS = 6
_MIN_CHUNK_SIZE_BITS = 12


def default_exact_cap() -> int:
    env = os.environ.get("PERMABOUND_EXACT_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ShapeError(f"PERMABOUND_EXACT_CAP must be an integer, got {env!r}") from None
    return DEFAULT_EXACT_CAP


class Algorithm(str, enum.Enum):
    NAIVE = "naive"
    RYSER = "ryser"


@dataclass(frozen=True)
class PermanentResult:
    value: complex
    algorithm: Algorithm
    n: int


def per_naive(z) -> complex:
    """Sum of all diagonal products over every permutation (lexicographic order).

    Partial products over the first rows are shared between permutations
    with a common prefix, which is the only deviation from the textbook sum.
    """
    a = as_square_matrix(z)
    n = a.shape[0]
    if n > NAIVE_CAP:
        raise SizeExceededError(f"per_naive is an oracle for n <= {NAIVE_CAP}, got n={n}")
    prod = np.ones(1, dtype=np.complex128)
    for j, (parent, col) in enumerate(_prefix_tree(n)):
        prod = prod[parent] * a[j, col]
    return complex(prod.sum())


@lru_cache(maxsize=None)
def _prefix_tree(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Per row ``j``: parent index and chosen column of each length-(j+1) prefix, in lex order."""
    levels = []
    used = np.zeros((1, n), dtype=bool)
    for _ in range(n):
        parent, col = np.nonzero(~used)
        used = used[parent]
        used[np.arange(len(col)), col] = True
        levels.append((parent, col))
    return tuple(levels)


def chunk_plan(n: int) -> list[tuple[int, int]]:
    """Aligned ``[start, stop)`` ranges covering ``[0, 2**n)``."""
    bits = max(0, min(_MAX_CHUNK_BITS, n - _MIN_CHUNK_SIZE_BITS))
    size = 1 << (n - bits)
    return [(c * size, (c + 1) * size) for c in range(1 << bits)]


def per_ryser(z, *, workers: int = 1, cap: int | None = None) -> complex:
    """Permanent by inclusion-exclusion over column subsets (Ryser).

    Cost is O(2^n n). With ``workers > 1`` the chunks of :func:`chunk_plan`
    run on a thread pool; the result is bitwise independent of ``workers``.
    """
    a = as_square_matrix(z)
    n = a.shape[0]
    cap = default_exact_cap() if cap is None else cap
    if n > cap:
        raise SizeExceededError(f"n={n} exceeds the exact-permanent cap {cap}")
    if n > 62:
        raise SizeExceededError("subset masks are limited to 62 columns")
    if n == 0:
        return 1 + 0j
    at = np.ascontiguousarray(a.T)
    plan = chunk_plan(n)
    if workers <= 1 or len(plan) == 1:
        parts = [_ryser_range(at, lo, hi) for lo, hi in plan]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: _ryser_range(at, r[0], r[1]), plan))
    total = 0j
    for p in parts:
        total += p
    return total


def permanent(z, algorithm: str | Algorithm = Algorithm.RYSER, **kwargs) -> PermanentResult:
    algorithm = Algorithm(algorithm)
    a = as_square_matrix(z)
    if algorithm is Algorithm.NAIVE:
        value = per_naive(a)
    else:
        value = per_ryser(a, **kwargs)
    return PermanentResult(value=value, algorithm=algorithm, n=a.shape[0])


def per_sub(z, rows, cols) -> complex:
    """Permanent of ``Z[rows, cols]``; 1 for the empty selection."""
    a = as_complex_matrix(z)
    r = _as_mask(rows, a.shape[0])
    c = _as_mask(cols, a.shape[1])
    if popcount(r) != popcount(c):
        raise InvalidCardinalityError(
            f"row and column subsets differ in size ({popcount(r)} vs {popcount(c)})"
        )
    ri, ci = mask_indices(r), mask_indices(c)
    k = len(ri)
    if k == 0:
        return 1 + 0j
    if k == 1:
        return complex(a[ri[0], ci[0]])
    if k == 2:
        return complex(a[ri[0], ci[0]] * a[ri[1], ci[1]] + a[ri[0], ci[1]] * a[ri[1], ci[0]])
    return per_ryser(a[np.ix_(ri, ci)])


def laplace_expand(z, J, L, M) -> complex:
    """Expand per(Z[J, L]) along the column block ``M``:

    ``sum over I in J, |I| = |M| of per(Z[I, M]) * per(Z[J \\ I, L \\ M])``.
    """
    a = as_complex_matrix(z)
    j = _as_mask(J, a.shape[0])
    l = _as_mask(L, a.shape[1])
    m = _as_mask(M, a.shape[1])
    if m & ~l:
        raise ContainmentError("M must be a subset of L")
    if popcount(j) != popcount(l):
        raise InvalidCardinalityError("|J| must equal |L|")
    rows = mask_indices(j)
    total = 0j
    for sub in iter_masks(len(rows), popcount(m)):
        i = 0
        for t in mask_indices(sub):
            i |= 1 << rows[t]
        total += per_sub(a, i, m) * per_sub(a, j & ~i, l & ~m)
    return total


def row_subset_permanents(z, cols) -> np.ndarray:
    """``per(Z[J, cols])`` for every row subset ``J`` with ``|J| = |cols|``.

    Entries follow colex order of ``J`` (the order of ``iter_subsets``). ``z``
    may carry leading batch dimensions: shape ``(..., n, N)``. Runs a dynamic
    program over the selected columns in O(2^n n |cols|) total work, which is
    far cheaper than one Ryser call per ``J`` when every ``J`` is needed.
    """
    a = np.asarray(z, dtype=np.complex128)
    n = a.shape[-2]
    ci = list(mask_indices(_as_mask(cols, a.shape[-1])))
    batch = a.shape[:-2]
    prev = np.ones(batch + (1,), dtype=np.complex128)
    for t, c in enumerate(ci, start=1):
        src, rowj = _dp_layer(n, t)
        vals = a[..., rowj, c] * prev[..., src]
        prev = vals.reshape(batch + (comb(n, t), t)).sum(axis=-1)
    return prev


_dp_cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def _dp_layer(n: int, t: int) -> tuple[np.ndarray, np.ndarray]:
    """For each t-subset J (colex) and each j in J: rank of J \\ {j} and j."""
    key = (n, t)
    hit = _dp_cache.get(key)
    if hit is not None:
        return hit
    if t > n:
        raise InvalidCardinalityError(f"need at least {t} rows, matrix has {n}")
    members = subset_members(n, t)
    masks = np.zeros(len(members), dtype=np.int64)
    for k in range(t):
        masks |= np.int64(1) << members[:, k].astype(np.int64)
    ranks = rank_lookup(n)
    src = ranks[masks[:, None] ^ (np.int64(1) << members.astype(np.int64))].ravel()
    rowj = members.ravel()
    _dp_cache[key] = (src, rowj)
    return src, rowj
