"""Elementary symmetric polynomials of nonnegative weights and block column means."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ColumnPartition, InvalidCardinalityError, ShapeError, as_complex_matrix

# switch to log-domain accumulation once the linear recurrence gets this big
_OVERFLOW_GUARD = 1e300


def as_weight_vector(y) -> np.ndarray:
    v = np.asarray(y, dtype=np.float64).ravel()
    if not np.all(np.isfinite(v)):
        raise ShapeError("weights must be finite")
    if np.any(v < 0):
        raise ShapeError("weights must be nonnegative")
    return v


def _check_m(n: int, m: int, lo: int = 0) -> None:
    if not lo <= m <= n:
        raise InvalidCardinalityError(f"m={m} must satisfy {lo} <= m <= n={n}")


def _esym_linear(y: np.ndarray, m: int) -> np.ndarray:
    e = np.zeros(m + 1)
    e[0] = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i, v in enumerate(y):
            top = min(i + 1, m)
            e[1:top + 1] += v * e[:top]
    return e


def _esym_log(y: np.ndarray, m: int) -> np.ndarray:
    with np.errstate(divide="ignore"):
        ly = np.log(y)
    le = np.full(m + 1, -np.inf)
    le[0] = 0.0
    for i, v in enumerate(ly):
        top = min(i + 1, m)
        le[1:top + 1] = np.logaddexp(le[1:top + 1], v + le[:top])
    return le


def log_esym(y, m: int) -> float:
    """``log e_m(y)``; ``-inf`` when ``e_m(y) = 0``."""
    v = as_weight_vector(y)
    _check_m(len(v), m)
    e = _esym_linear(v, m)
    if np.all(e < _OVERFLOW_GUARD):
        return math.log(e[m]) if e[m] > 0 else -math.inf
    return float(_esym_log(v, m)[m])


def esym(y, m: int) -> float:
    """Elementary symmetric polynomial ``e_m(y)`` by the prefix recurrence.

    ``e_m`` over ``y[:i+1]`` equals ``e_m`` over ``y[:i]`` plus ``y[i]`` times
    ``e_{m-1}`` over ``y[:i]``. All terms are nonnegative, so there is no
    cancellation. Large values are accumulated in log space.
    """
    v = as_weight_vector(y)
    _check_m(len(v), m)
    e = _esym_linear(v, m)
    if np.all(e < _OVERFLOW_GUARD):
        return float(e[m])
    with np.errstate(over="ignore"):
        return float(np.exp(_esym_log(v, m)[m]))


def esym_all(y, m: int) -> np.ndarray:
    """``[e_0(y), ..., e_m(y)]`` in the linear domain."""
    v = as_weight_vector(y)
    _check_m(len(v), m)
    return _esym_linear(v, m)


def log_esym_batch(y, m: int) -> np.ndarray:
    """``log e_m`` of every row of a ``(T, n)`` weight array."""
    v = np.asarray(y, dtype=np.float64)
    if v.ndim != 2:
        raise ShapeError("batched weights must be a 2-D array")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise ShapeError("weights must be finite and nonnegative")
    _check_m(v.shape[1], m)
    e = np.zeros((v.shape[0], m + 1))
    e[:, 0] = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(v.shape[1]):
            top = min(i + 1, m)
            e[:, 1:top + 1] += v[:, i:i + 1] * e[:, :top]
    with np.errstate(divide="ignore"):
        out = np.log(e[:, m])
    big = ~np.all(e < _OVERFLOW_GUARD, axis=1)
    for t in np.nonzero(big)[0]:
        out[t] = _esym_log(v[t], m)[m]
    return out


def maclaurin_mean(y, m: int) -> float:
    """Normalized elementary symmetric mean ``S_m = e_m(y) / C(n, m)``."""
    v = as_weight_vector(y)
    _check_m(len(v), m, lo=1)
    return math.exp(log_maclaurin_mean(v, m))


def log_maclaurin_mean(y, m: int) -> float:
    v = as_weight_vector(y)
    n = len(v)
    _check_m(n, m)
    return log_esym(v, m) - log_binomial(n, m)


def log_binomial(n: int, k: int) -> float:
    return math.log(math.comb(n, k))


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


@dataclass(frozen=True)
class BlockColumnMeans:
    """``alpha[j, k]``: mean of ``|z[j, r]|^2`` over the columns ``r`` of block ``k``."""

    alpha: np.ndarray
    partition: ColumnPartition


def compute_alpha(z, partition: ColumnPartition) -> BlockColumnMeans:
    a = as_complex_matrix(z)
    if partition.universe.universe_size > a.shape[1]:
        raise ShapeError(
            f"partition lives on {partition.universe.universe_size} columns, matrix has {a.shape[1]}"
        )
    sq = a.real ** 2 + a.imag ** 2
    alpha = np.empty((a.shape[0], len(partition)))
    for k, block in enumerate(partition.blocks):
        cols = list(block.indices)
        alpha[:, k] = sq[:, cols].sum(axis=1) / len(cols)
    return BlockColumnMeans(alpha=alpha, partition=partition)
