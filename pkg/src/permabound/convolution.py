"""Subset m-convolution of set functions and the mean-square inequality behind the bounds.

For a product-form ``g(I) = prod g_j`` and any nonnegative ``h`` on
``(l - m)``-subsets, the normalized mean square of ``(g *_m h)(J) / C(l, m)``
over ``l``-subsets ``J`` is at most the product of the normalized mean squares
of ``g`` on ``m``-subsets and of ``h``. The coefficient identities used to
prove it are checked here in exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Callable

import numpy as np

from .core import (
    InvalidCardinalityError,
    PermaboundError,
    ShapeError,
    _as_mask,
    binomial_exact,
    iter_masks,
    mask_indices,
    popcount,
    rank_lookup,
    subset_masks,
    subset_members,
    subset_rank,
)
from .sympoly import as_weight_vector


class IdentityViolationError(PermaboundError):
    """An exact identity failed. This is always an implementation bug."""


# --------------------------------------------------------------------------
# set functions


@dataclass(frozen=True)
class SetFunction:
    """Nonnegative function on the ``k``-subsets of ``{0..n-1}``.

    ``table[r]`` is the value on the subset of colex rank ``r``.
    """

    n: int
    k: int
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.float64)
        if t.shape != (comb(self.n, self.k),):
            raise ShapeError(f"table must have C({self.n},{self.k}) = {comb(self.n, self.k)} entries")
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise ShapeError("set function values must be finite and nonnegative")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @classmethod
    def from_callable(cls, n: int, k: int, fn: Callable[[int], float]) -> "SetFunction":
        """Build from ``fn(mask)`` evaluated on every k-subset mask."""
        return cls(n, k, np.array([fn(m) for m in iter_masks(n, k)], dtype=np.float64))

    @classmethod
    def constant(cls, n: int, k: int, value: float) -> "SetFunction":
        return cls(n, k, np.full(comb(n, k), float(value)))

    def __call__(self, subset) -> float:
        m = _as_mask(subset, self.n)
        if popcount(m) != self.k:
            raise InvalidCardinalityError(f"set function is defined on {self.k}-subsets only")
        return float(self.table[subset_rank(m)])


@dataclass(frozen=True)
class ProductSetFunction:
    """``g(I) = prod_{j in I} g_j`` for nonnegative weights ``g_j``."""

    weights: np.ndarray = field()

    def __post_init__(self):
        w = as_weight_vector(self.weights)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return len(self.weights)

    def __call__(self, subset) -> float:
        m = _as_mask(subset, self.n)
        out = 1.0
        for j in mask_indices(m):
            out *= self.weights[j]
        return out

    def table(self, k: int) -> np.ndarray:
        """Values on all k-subsets in colex order."""
        return product_table(self.weights, k)


def product_table(weights: np.ndarray, k: int) -> np.ndarray:
    """``prod weights[..., I]`` over colex-ordered k-subsets; batches on leading axes."""
    w = np.asarray(weights, dtype=np.float64)
    members = subset_members(w.shape[-1], k)
    if k == 0:
        return np.ones(w.shape[:-1] + (1,))
    return np.prod(w[..., members], axis=-1)


# --------------------------------------------------------------------------
# convolution


def _check_shape(g: ProductSetFunction, h: SetFunction, n: int, l: int, m: int) -> None:
    if not isinstance(g, ProductSetFunction):
        raise TypeError("g must be a ProductSetFunction; general g is not supported")
    if not 0 <= m <= l <= n:
        raise InvalidCardinalityError(f"need 0 <= m <= l <= n, got m={m}, l={l}, n={n}")
    if g.n != n or h.n != n:
        raise ShapeError(f"g and h must live on a universe of size n={n}")
    if h.k != l - m:
        raise InvalidCardinalityError(f"h must be defined on {l - m}-subsets, got {h.k}")


def conv_m(g: ProductSetFunction, h: SetFunction, m: int, J) -> float:
    """``(g *_m h)(J) = sum over m-subsets I of J of g(I) h(J \\ I)``, by enumeration."""
    j = _as_mask(J, h.n)
    l = popcount(j)
    _check_shape(g, h, h.n, l, m)
    rows = mask_indices(j)
    total = 0.0
    for sub in iter_masks(l, m):
        i = 0
        for t in mask_indices(sub):
            i |= 1 << rows[t]
        total += g(i) * h(j & ~i)
    return total


@lru_cache(maxsize=512)
def _conv_index(n: int, l: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Ranks of ``I`` and ``J \\ I`` for every l-subset J and m-subset I of J.

    Both arrays have shape ``(C(n, l), C(l, m))``.
    """
    jm = subset_members(n, l)
    pos = subset_members(l, m)
    one = np.int64(1)
    jmask = np.zeros(len(jm), dtype=np.int64)
    for t in range(l):
        jmask |= one << jm[:, t].astype(np.int64)
    imask = np.zeros((len(jm), len(pos)), dtype=np.int64)
    for t in range(m):
        imask |= one << jm[:, pos[:, t]].astype(np.int64)
    ranks = rank_lookup(n)
    return ranks[imask], ranks[jmask[:, None] & ~imask]


def conv_table(gtable: np.ndarray, htable: np.ndarray, n: int, l: int, m: int) -> np.ndarray:
    """``(g *_m h)(J)`` for all l-subsets J, vectorized; leading axes batch."""
    i_rank, k_rank = _conv_index(n, l, m)
    return (gtable[..., i_rank] * htable[..., k_rank]).sum(axis=-1)


def master_sides(gtable: np.ndarray, htable: np.ndarray, n: int, l: int, m: int):
    """Both sides of the mean-square inequality from value tables (batched)."""
    conv = conv_table(gtable, htable, n, l, m) / comb(l, m)
    lhs = np.mean(conv ** 2, axis=-1)
    rhs = np.mean(gtable ** 2, axis=-1) * np.mean(htable ** 2, axis=-1)
    return lhs, rhs


@dataclass(frozen=True)
class MasterReport:
    lhs: float
    rhs: float
    holds: bool
    slack: float


def master_inequality_check(g: ProductSetFunction, h: SetFunction, n: int, l: int, m: int,
                            rel_tol: float = 1e-12) -> MasterReport:
    _check_shape(g, h, n, l, m)
    lhs, rhs = master_sides(g.table(m), h.table, n, l, m)
    lhs, rhs = float(lhs), float(rhs)
    return MasterReport(lhs=lhs, rhs=rhs, holds=lhs <= rhs * (1 + rel_tol), slack=rhs - lhs)


def master_inequality_batch(g_weights: np.ndarray, h_tables: np.ndarray, n: int, l: int, m: int):
    """Sides of the inequality for a batch: ``g_weights`` is ``(T, n)``, ``h_tables`` ``(T, C(n, l-m))``."""
    return master_sides(product_table(g_weights, m), h_tables, n, l, m)


def probe_general_g(gtable: np.ndarray, htable: np.ndarray, n: int, l: int, m: int):
    """Experimental: the same two sides with an arbitrary nonnegative ``g`` table.

    Whether the inequality survives without the product form is unknown, so
    this returns the raw sides and makes no claim.
    """
    return master_sides(np.asarray(gtable, float), np.asarray(htable, float), n, l, m)


# --------------------------------------------------------------------------
# equality cases


def _is_constant(t: np.ndarray, tol: float) -> bool:
    if t.size == 0:
        return True
    hi = float(np.max(t))
    return float(np.max(t) - np.min(t)) <= tol * hi


def classify_equality(g: ProductSetFunction, h: SetFunction, n: int, l: int, m: int,
                      tol: float = 1e-9) -> frozenset[str]:
    """Labels of the sufficient equality conditions that hold.

    ``"i"``: m in {0, l}.  ``"ii"``: at most m-1 weights are positive.
    ``"iii"``: h vanishes.  ``"iv"``: l = n and g(I) = x h(complement of I)
    for one x >= 0.  ``"v"``: g and h are both constant.
    Zero tests are absolute at ``tol``; equality tests are relative to the
    largest value of the function involved.
    """
    _check_shape(g, h, n, l, m)
    out = set()
    if m in (0, l):
        out.add("i")
    if m >= 1 and int(np.sum(g.weights > tol)) <= m - 1:
        out.add("ii")
    htab = h.table
    if htab.size == 0 or float(np.max(htab)) <= tol:
        out.add("iii")
    if l == n and _proportional_to_complement(g, h, n, m, tol):
        out.add("iv")
    if _is_constant(g.weights, tol) and _is_constant(htab, tol):
        out.add("v")
    return frozenset(out)


def _proportional_to_complement(g: ProductSetFunction, h: SetFunction, n: int, m: int,
                                tol: float) -> bool:
    gt = g.table(m)
    full = (1 << n) - 1
    ranks = rank_lookup(n)
    hc = h.table[ranks[full & ~subset_masks(n, m)]]
    g_scale = float(np.max(gt)) if gt.size else 0.0
    h_scale = float(np.max(hc)) if hc.size else 0.0
    if h_scale <= tol:
        return g_scale <= tol
    first = int(np.argmax(hc > tol * h_scale))
    x = gt[first] / hc[first]
    return bool(np.all(np.abs(gt - x * hc) <= tol * max(g_scale, x * h_scale)))


# --------------------------------------------------------------------------
# exact coefficients


def _b(x, k) -> Fraction:
    """Binomial that is 0 for negative k (out-of-range lower index)."""
    if k < 0:
        return Fraction(0)
    return binomial_exact(x, k)


def coefficient_c(l: int, m: int, n: int) -> Fraction:
    """``C(l, m, n) = C(l, m) C(n - l + m, m) / C(n, m)``."""
    return _b(l, m) * _b(n - l + m, m) / _b(n, m)


def coefficient_c_alt(l: int, m: int, n: int) -> Fraction:
    """The same constant as ``C(n, l) C(l, m)^2 / (C(n, m) C(n, l - m))``."""
    return _b(n, l) * _b(l, m) ** 2 / (_b(n, m) * _b(n, l - m))


def coefficient_f(l: int, m: int, n: int, a: int, b: int) -> Fraction:
    """``f(a, b) = C(n-l, m-a-b) C(l, b) / (C(m-a, b)^2 C(n, m-a))`` for ``a + b <= m``."""
    if a < 0 or b < 0 or a + b > m:
        raise InvalidCardinalityError(f"f(a, b) needs a, b >= 0 and a + b <= m, got ({a}, {b})")
    return _b(n - l, m - a - b) * _b(l, b) / (_b(m - a, b) ** 2 * _b(n, m - a))


@dataclass(frozen=True)
class ConvCoefficients:
    l: int
    m: int
    n: int
    C: Fraction
    f: dict[tuple[int, int], Fraction]


def conv_coefficients(l: int, m: int, n: int) -> ConvCoefficients:
    """Exact ``C(l, m, n)`` and the ``f(a, b)`` table, with every identity verified.

    Checked before returning: for each ``a``, ``sum_b f(a,b) C(m-a,b)^2 = 1``;
    for each ``b <= min(m, l-m)``,
    ``sum_a f(a,b) C(m-b,a) C(l-m-b,m-a-b) C(n-l+b,b) = C`` with ``a`` from
    ``max(0, 2m-l)`` to ``m-b``; the two closed forms of ``C`` agree; and
    ``(m!)^2 C ((l-m)!)^2 C(n,l-m) C(n,m) = (l!)^2 C(n,l)``.
    """
    if not 0 <= m <= l <= n:
        raise InvalidCardinalityError(f"need 0 <= m <= l <= n, got l={l}, m={m}, n={n}")
    C = coefficient_c(l, m, n)
    f = {(a, b): coefficient_f(l, m, n, a, b) for a in range(m + 1) for b in range(m - a + 1)}

    for a in range(m + 1):
        s = sum(f[a, b] * _b(m - a, b) ** 2 for b in range(m - a + 1))
        if s != 1:
            raise IdentityViolationError(f"normalization fails at l={l}, m={m}, n={n}, a={a}: {s}")
    for b in range(min(m, l - m) + 1):
        s = sum(
            f[a, b] * _b(m - b, a) * _b(l - m - b, m - a - b) * _b(n - l + b, b)
            for a in range(max(0, 2 * m - l), m - b + 1)
        )
        if s != C:
            raise IdentityViolationError(f"column sum fails at l={l}, m={m}, n={n}, b={b}: {s} != {C}")
    if coefficient_c_alt(l, m, n) != C:
        raise IdentityViolationError(f"closed forms of C disagree at l={l}, m={m}, n={n}")
    lhs = (factorial(m) ** 2) * C * (factorial(l - m) ** 2) * _b(n, l - m) * _b(n, m)
    if lhs != factorial(l) ** 2 * _b(n, l):
        raise IdentityViolationError(f"telescoping constant fails at l={l}, m={m}, n={n}")
    return ConvCoefficients(l=l, m=m, n=n, C=C, f=f)


def f_positive_expected(l: int, m: int, n: int, a: int, b: int) -> bool:
    """Positivity criterion for ``f(a, b)``: positive iff ``m - a - b <= n - l``."""
    return m - a - b <= n - l


# --------------------------------------------------------------------------
# Pfaff-Saalschutz


@dataclass(frozen=True)
class PfaffReport:
    lhs: Fraction
    rhs: Fraction
    equal: bool


def pfaff_saalschutz_check(x, y, m: int, n: int) -> PfaffReport:
    """Compare ``sum_k C(x,m-k) C(y,n-k) C(x+y+k,k)`` with ``C(x+n,m) C(y+m,n)`` exactly."""
    if m < 0 or n < 0:
        raise InvalidCardinalityError("m and n must be nonnegative")
    x, y = Fraction(x), Fraction(y)
    lhs = sum(
        (binomial_exact(x, m - k) * binomial_exact(y, n - k) * binomial_exact(x + y + k, k)
         for k in range(min(m, n) + 1)),
        Fraction(0),
    )
    rhs = binomial_exact(x + n, m) * binomial_exact(y + m, n)
    return PfaffReport(lhs=lhs, rhs=rhs, equal=lhs == rhs)
