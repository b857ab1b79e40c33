"""Hadamard-type upper bounds on |per(Z)| and their equality classifiers.

All bounds are assembled in log space (``log_*`` functions) and exponentiated
at the end, so ``n!`` factors do not overflow before the bound itself does.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, lgamma

import numpy as np

from .convolution import conv_coefficients
from .core import (
    ColumnPartition,
    ContainmentError,
    InvalidCardinalityError,
    PermaboundError,
    ShapeError,
    SizeExceededError,
    _as_mask,
    as_complex_matrix,
    as_square_matrix,
    iter_masks,
    mask_indices,
    popcount,
)
from .permanent import default_exact_cap, per_ryser, per_sub, row_subset_permanents
from .sympoly import compute_alpha, log_esym, log_esym_batch


class ModulusPatternError(PermaboundError):
    """A column block does not have constant moduli along each row."""


class NonBinaryError(PermaboundError):
    pass


class ZeroEntryError(PermaboundError):
    pass


def _exp(x: float) -> float:
    return 0.0 if x == -math.inf else math.exp(x)


def _log_comb(n: int, k: int) -> float:
    return math.log(comb(n, k))


def _abs2(a: np.ndarray) -> np.ndarray:
    return a.real ** 2 + a.imag ** 2


# --------------------------------------------------------------------------
# classic bound


def log_column_norm_product(z) -> float:
    a = as_complex_matrix(z)
    if a.size == 0:
        raise ShapeError("column norm product needs a nonempty matrix")
    norms = _abs2(a).sum(axis=0)
    if np.any(norms == 0):
        return -math.inf
    return 0.5 * float(np.sum(np.log(norms)))


def column_norm_product(z) -> float:
    """Product of the Euclidean norms of the columns of ``z``."""
    return _exp(log_column_norm_product(z))


def log_bound_classic(z) -> float:
    a = as_square_matrix(z)
    n = a.shape[0]
    if n == 0:
        raise ShapeError("bound needs n >= 1")
    return lgamma(n + 1) - 0.5 * n * math.log(n) + log_column_norm_product(a)


def bound_classic(z) -> float:
    """``n! prod_r (mean_j |z_jr|^2)^(1/2)``, i.e. ``n! / n^(n/2)`` times the column norm product."""
    return _exp(log_bound_classic(z))


# --------------------------------------------------------------------------
# partition bounds


def _log_block_factor(alpha: np.ndarray, n: int, m: int) -> float:
    return log_esym(alpha, m) - _log_comb(n, m)


def _check_full_partition(n: int, partition: ColumnPartition) -> None:
    if partition.universe.universe_size != n or partition.universe.bits != (1 << n) - 1:
        raise ShapeError(f"partition must cover all {n} columns")


def log_bound_partition(z, partition: ColumnPartition) -> float:
    a = as_square_matrix(z)
    n = a.shape[0]
    _check_full_partition(n, partition)
    alpha = compute_alpha(a, partition).alpha
    total = lgamma(n + 1)
    for k, m in enumerate(partition.sizes):
        total += 0.5 * _log_block_factor(alpha[:, k], n, m)
    return total


def bound_partition(z, partition: ColumnPartition) -> float:
    """``n! prod_k (e_{m_k}(alpha[:, k]) / C(n, m_k))^(1/2)`` over the column blocks."""
    return _exp(log_bound_partition(z, partition))


def _subset_shape(a: np.ndarray, L: int, partition: ColumnPartition) -> tuple[int, int]:
    n = a.shape[0]
    l = popcount(L)
    if l == 0:
        raise ShapeError("L must be nonempty")
    if l > n:
        raise InvalidCardinalityError(f"|L| = {l} exceeds the number of rows {n}")
    if partition.universe.bits != L:
        raise ShapeError("partition must cover exactly L")
    return n, l


def log_bound_subsum(z, L, partition: ColumnPartition) -> float:
    a = as_complex_matrix(z)
    Lm = _as_mask(L, a.shape[1])
    n, l = _subset_shape(a, Lm, partition)
    alpha = compute_alpha(a, partition).alpha
    total = 2 * lgamma(l + 1) + _log_comb(n, l)
    for k, m in enumerate(partition.sizes):
        total += _log_block_factor(alpha[:, k], n, m)
    return total


def bound_subsum(z, L, partition: ColumnPartition) -> float:
    """Upper bound on ``sum over l-subsets J of rows of |per(Z[J, L])|^2``.

    Equals ``(l!)^2 C(n, l) prod_k e_{m_k}(alpha[:, k]) / C(n, m_k)``.
    """
    return _exp(log_bound_subsum(z, L, partition))


DEFAULT_BUDGET = 1 << 22


def subsum_lhs(z, L, budget: int = DEFAULT_BUDGET) -> float:
    """``sum over |J| = |L| of |per(Z[J, L])|^2`` by one ``per_sub`` call per J."""
    a = as_complex_matrix(z)
    Lm = _as_mask(L, a.shape[1])
    n, l = a.shape[0], popcount(Lm)
    if comb(n, l) * (1 << l) > budget:
        raise SizeExceededError(f"C({n},{l}) * 2^{l} exceeds the verification budget {budget}")
    return math.fsum(abs(per_sub(a, J, Lm)) ** 2 for J in iter_masks(n, l))


def subsum_lhs_fast(z, L) -> float:
    """Same quantity as :func:`subsum_lhs` via the row-subset dynamic program."""
    a = as_complex_matrix(z)
    vals = row_subset_permanents(a, _as_mask(L, a.shape[1]))
    return float(np.sum(_abs2(vals)))


@dataclass(frozen=True)
class StepReport:
    rhs: float
    C: Fraction
    lhs: float | None = None


def bound_step(z, L, M, *, with_lhs: bool = True) -> StepReport:
    """Single-block reduction step for ``sum_J |per(Z[J, L])|^2``.

    Right-hand side ``(m!)^2 C(l,m,n) e_m(g) sum_K |per(Z[K, L \\ M])|^2``
    where ``g_j`` is the mean of ``|z_jr|^2`` over ``r`` in ``M``.
    """
    a = as_complex_matrix(z)
    Lm = _as_mask(L, a.shape[1])
    Mm = _as_mask(M, a.shape[1])
    if Mm == 0:
        raise ContainmentError("M must be nonempty")
    if Mm & ~Lm:
        raise ContainmentError("M must be a subset of L")
    n, l, m = a.shape[0], popcount(Lm), popcount(Mm)
    if l > n:
        raise InvalidCardinalityError(f"|L| = {l} exceeds the number of rows {n}")
    C = conv_coefficients(l, m, n).C
    g = _abs2(a[:, list(mask_indices(Mm))]).mean(axis=1)
    h_sq = float(np.sum(_abs2(row_subset_permanents(a, Lm & ~Mm))))
    log_rhs = 2 * lgamma(m + 1) + math.log(C) + log_esym(g, m)
    rhs = _exp(log_rhs) * h_sq
    lhs = subsum_lhs_fast(a, Lm) if with_lhs else None
    return StepReport(rhs=rhs, C=C, lhs=lhs)


def bound_step_batch(zs, L, M) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the reduction step for a stack of matrices ``(T, n, N)``.

    Returns ``(lhs, rhs)`` arrays of length ``T``; each entry agrees with
    :func:`bound_step` on the corresponding matrix.
    """
    a = np.asarray(zs, dtype=np.complex128)
    if a.ndim != 3:
        raise ShapeError("expected a (T, n, N) stack of matrices")
    n, cols = a.shape[1:]
    Lm = _as_mask(L, cols)
    Mm = _as_mask(M, cols)
    if Mm == 0:
        raise ContainmentError("M must be nonempty")
    if Mm & ~Lm:
        raise ContainmentError("M must be a subset of L")
    l, m = popcount(Lm), popcount(Mm)
    if l > n:
        raise InvalidCardinalityError(f"|L| = {l} exceeds the number of rows {n}")
    C = conv_coefficients(l, m, n).C
    g = _abs2(a[:, :, list(mask_indices(Mm))]).mean(axis=2)
    h_sq = np.sum(_abs2(row_subset_permanents(a, Lm & ~Mm)), axis=-1)
    log_rhs = 2 * lgamma(m + 1) + math.log(C) + log_esym_batch(g, m)
    rhs = np.exp(log_rhs) * h_sq
    lhs = np.sum(_abs2(row_subset_permanents(a, Lm)), axis=-1)
    return lhs, rhs


def _block_moduli_ok(a: np.ndarray, partition: ColumnPartition, reps, tol: float) -> bool:
    mod = np.abs(a)
    for block, s in zip(partition.blocks, reps):
        cols = list(block.indices)
        ref = mod[:, [s]]
        if not np.all(np.abs(mod[:, cols] - ref) <= tol * np.maximum(mod[:, cols], ref)):
            return False
    return True


def _default_reps(partition: ColumnPartition) -> list[int]:
    return [b.indices[0] for b in partition.blocks]


def log_bound_corollary(z, partition: ColumnPartition, representatives=None,
                        tol: float = 1e-9) -> float:
    a = as_square_matrix(z)
    n = a.shape[0]
    _check_full_partition(n, partition)
    reps = _default_reps(partition) if representatives is None else list(representatives)
    if len(reps) != len(partition):
        raise ShapeError("need one representative column per block")
    for s, block in zip(reps, partition.blocks):
        if s not in block:
            raise ShapeError(f"representative {s} is not in its block")
    if not _block_moduli_ok(a, partition, reps, tol):
        raise ModulusPatternError("moduli are not constant along rows within each block")
    sq = _abs2(a)
    total = lgamma(n + 1)
    for s, m in zip(reps, partition.sizes):
        total += 0.5 * _log_block_factor(sq[:, s], n, m)
    return total


def bound_corollary(z, partition: ColumnPartition, representatives=None,
                    tol: float = 1e-9) -> float:
    """Partition bound when each block has constant moduli along every row.

    Uses ``|z_{j, s_k}|^2`` for one representative column ``s_k`` per block.
    """
    return _exp(log_bound_corollary(z, partition, representatives, tol))


def corollary_applies(z, partition: ColumnPartition, tol: float = 1e-9) -> bool:
    a = as_square_matrix(z)
    return _block_moduli_ok(a, partition, _default_reps(partition), tol)


# --------------------------------------------------------------------------
# 0/1 matrices


@lru_cache(maxsize=None)
def eta(k: int) -> float:
    """``(k!)^(1/k)``, with ``eta(0) = 0``."""
    if k < 0:
        raise InvalidCardinalityError("eta is defined for k >= 0")
    if k == 0:
        return 0.0
    return math.exp(lgamma(k + 1) / k)


def is_binary(z) -> bool:
    a = np.asarray(z)
    return bool(np.all((a == 0) | (a == 1)))


def bound_bregman_minc(z) -> float:
    """``prod_j eta(row sum j)`` for a square 0/1 matrix."""
    a = as_square_matrix(z)
    if not is_binary(a):
        raise NonBinaryError("Bregman-Minc bound needs a 0/1 matrix")
    sums = np.rint(a.real.sum(axis=1)).astype(int)
    if np.any(sums == 0):
        return 0.0
    return math.exp(sum(math.log(eta(int(s))) for s in sums))


# --------------------------------------------------------------------------
# equality classifiers


@dataclass(frozen=True)
class PhaseFactorization:
    factorizable: bool
    xi: np.ndarray | None = None
    zeta: np.ndarray | None = None


def check_phase_factorizable(z, tol: float = 1e-9) -> PhaseFactorization:
    """Find unit ``xi_j``, ``zeta_r`` with ``z_jr = xi_j zeta_r |z_jr|``, if they exist.

    ``zeta`` is read off the first row and ``xi`` off the first column; every
    other entry is then checked against ``tol``.
    """
    a = as_complex_matrix(z)
    mod = np.abs(a)
    if a.size == 0:
        return PhaseFactorization(True, np.ones(a.shape[0], complex), np.ones(a.shape[1], complex))
    if np.min(mod) <= tol:
        raise ZeroEntryError("phase factorization needs every |z_jr| > tol")
    u = a / mod
    zeta = u[0].copy()
    xi = u[:, 0] / u[0, 0]
    ok = bool(np.all(np.abs(u - np.outer(xi, zeta)) <= tol))
    if not ok:
        return PhaseFactorization(False)
    return PhaseFactorization(True, xi, zeta)


def classify_partition_equality(z, partition: ColumnPartition, tol: float = 1e-9) -> frozenset[str]:
    """Sufficient conditions for equality in the partition bound.

    ``"A"``: some block ``k`` has at least ``n - m_k + 1`` rows vanishing on it.
    ``"B"``: ``z_jr = xi_j zeta_r y_k`` with unit phases and ``y_k > 0``
    constant over each block. An empty result says nothing about strictness.
    """
    a = as_square_matrix(z)
    n = a.shape[0]
    _check_full_partition(n, partition)
    mod = np.abs(a)
    scale = float(np.max(mod)) if mod.size else 0.0
    out = set()
    for block, m in zip(partition.blocks, partition.sizes):
        zero_rows = np.all(mod[:, list(block.indices)] <= tol * scale, axis=1)
        if int(np.sum(zero_rows)) >= n - m + 1:
            out.add("A")
            break
    if scale > 0 and np.min(mod) > tol * scale:
        constant = all(
            np.ptp(mod[:, list(b.indices)]) <= tol * np.max(mod[:, list(b.indices)])
            for b in partition.blocks
        )
        if constant and check_phase_factorizable(a / scale, tol).factorizable:
            out.add("B")
    return frozenset(out)


# --------------------------------------------------------------------------
# 3x3 comparison with blocks {0, 1}, {2}


def w_quantity(z) -> float:
    """``(|e|^2|f|^2 + |e|^2|g|^2 + |f|^2|g|^2) - (4/3) prod_{r<2} sum_j |z_jr|^2``.

    ``e, f, g`` are the rows of the first two columns. With the last column
    nonzero, the 2+1 partition bound beats the classic bound iff this is < 0.
    """
    a = as_square_matrix(z)
    if a.shape != (3, 3):
        raise ShapeError("w_quantity is defined for 3x3 matrices")
    rn = _abs2(a[:, :2]).sum(axis=1)
    pair_sum = rn[0] * rn[1] + rn[0] * rn[2] + rn[1] * rn[2]
    cols = _abs2(a[:, :2]).sum(axis=0)
    return float(pair_sum - 4.0 / 3.0 * cols[0] * cols[1])


def w_quantity_expanded(z) -> float:
    """The pairwise-difference expansion of :func:`w_quantity` for nonnegative real 3x3 ``z``."""
    a = np.asarray(z, dtype=float)
    s = a ** 2
    total = 0.0
    for j1, j2 in ((0, 1), (0, 2), (1, 2)):
        total += (s[j1, 0] - s[j2, 0]) * (s[j1, 1] - s[j2, 1]) / 3.0
        total -= (s[j1, 0] - s[j2, 1]) * (s[j1, 1] - s[j2, 0])
    return total


def partition_gap(z, partition: ColumnPartition) -> float:
    """``bound_partition^2 - bound_classic^2``; negative when the partition bound is sharper."""
    return bound_partition(z, partition) ** 2 - bound_classic(z) ** 2


# --------------------------------------------------------------------------
# reports


@dataclass
class BoundEntry:
    name: str
    value: float
    log_value: float | None
    tightness: float | None = None
    equality_flags: list[str] = field(default_factory=list)


@dataclass
class BoundReport:
    per_abs: float | None
    bounds: list[BoundEntry]

    def to_dict(self) -> dict:
        return {"per_abs": self.per_abs, "bounds": [asdict(b) for b in self.bounds]}


def _entry(name: str, log_value: float, per_abs: float | None, flags=()) -> BoundEntry:
    value = _exp(log_value)
    tight = None
    if per_abs is not None:
        tight = 1.0 if value == 0 and per_abs == 0 else (per_abs / value if value else math.inf)
    return BoundEntry(
        name=name,
        value=value,
        log_value=None if log_value == -math.inf else log_value,
        tightness=tight,
        equality_flags=sorted(flags),
    )


def bound_report(z, partition: ColumnPartition | None = None, *, exact_cap: int | None = None,
                 tol: float = 1e-9, workers: int = 1) -> BoundReport:
    """Every applicable bound for a square ``z``, with |per| and tightness when feasible."""
    a = as_square_matrix(z)
    n = a.shape[0]
    cap = default_exact_cap() if exact_cap is None else exact_cap
    per_abs = abs(per_ryser(a, workers=workers, cap=cap)) if n <= cap else None
    entries = [
        _entry("classic", log_bound_classic(a), per_abs,
               classify_partition_equality(a, ColumnPartition.singletons(n), tol)),
    ]
    if partition is not None:
        entries.append(_entry("partition", log_bound_partition(a, partition), per_abs,
                              classify_partition_equality(a, partition, tol)))
        if corollary_applies(a, partition, tol):
            entries.append(_entry("corollary", log_bound_corollary(a, partition, tol=tol), per_abs))
    if is_binary(a):
        b = bound_bregman_minc(a)
        entries.append(_entry("bregman_minc", math.log(b) if b > 0 else -math.inf, per_abs))
    return BoundReport(per_abs=per_abs, bounds=entries)
