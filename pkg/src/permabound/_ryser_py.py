"""Pure numpy Ryser kernel, used when the compiled extension is unavailable.

Same contract as the compiled ``ryser_range`` except that index ``k`` names
the column subset with mask ``k`` itself rather than its Gray code, and the
range must be an aligned power-of-two block. Both conventions cover every
subset exactly once over ``[0, 2**n)``.
Like the compiled kernel it works in extended precision where the platform
has it (``np.clongdouble``), falling back to plain complex128 elsewhere.
"""

import numpy as np

_LOW_BITS = 12
_WIDE = np.clongdouble


def _subset_sums(cols: np.ndarray) -> np.ndarray:
    """Row-sum vectors for every subset of the given columns, indexed by mask."""
    n = cols.shape[1]
    table = np.zeros((1, n), dtype=_WIDE)
    for col in cols:
        table = np.concatenate([table, table + col])
    return table


def _parity(count: int) -> np.ndarray:
    bits = np.arange(count, dtype=np.int64)
    par = np.zeros(count, dtype=np.int64)
    while bits.any():
        par ^= bits & 1
        bits >>= 1
    return par


def ryser_range(at: np.ndarray, start: int, stop: int) -> complex:
    """Partial Ryser sum over subset masks ``[start, stop)``; ``at`` is Z transposed."""
    at = np.asarray(at, dtype=np.complex128).astype(_WIDE)
    n = at.shape[0]
    if n == 0:
        raise ValueError("ryser_range needs n >= 1")
    size = stop - start
    if size <= 0 or size & (size - 1) or start % size or stop > 1 << n:
        raise ValueError("fallback kernel needs an aligned power-of-two block")
    b = size.bit_length() - 1
    low = min(b, _LOW_BITS)

    high = start >> b
    base = np.zeros(n, dtype=_WIDE)
    high_count = 0
    for j in range(b, n):
        if high >> (j - b) & 1:
            base += at[j]
            high_count += 1

    table = _subset_sums(at[:low])
    # sign (-1)^(n - |S|) split as low part times the rest
    low_sign = (1 - 2 * _parity(1 << low)).astype(np.longdouble)

    total = _WIDE(0)
    mid_cols = at[low:b]
    for mid in range(1 << (b - low)):
        vec = base.copy()
        mid_count = 0
        for t in range(b - low):
            if mid >> t & 1:
                vec += mid_cols[t]
                mid_count += 1
        prods = np.prod(table + vec, axis=1)
        part = np.dot(low_sign, prods)
        total += -part if (n - high_count - mid_count) & 1 else part
    return complex(total)
