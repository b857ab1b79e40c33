"""Coefficients of products of linear forms ``prod_j (sum_k z_jk x_k)``.

A coefficient of ``x^m`` equals ``per(Z') / m!`` where ``Z'`` repeats column
``k`` of ``Z`` exactly ``m_k`` times, which gives a permanent route, a direct
expansion route, and a Hadamard-type bound on the coefficient.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from math import comb, lgamma

import numpy as np

from .core import InvalidCardinalityError, ShapeError, SizeExceededError, as_complex_matrix
from .permanent import per_ryser
from .sympoly import log_esym

ExponentVector = tuple[int, ...]

DEFAULT_TERM_BUDGET = 200_000


def as_exponent(m, d: int | None = None) -> ExponentVector:
    e = tuple(int(v) for v in m)
    if any(v < 0 for v in e):
        raise ShapeError(f"exponents must be nonnegative, got {e}")
    if d is not None and len(e) != d:
        raise ShapeError(f"exponent vector needs {d} entries, got {len(e)}")
    return e


def multi_factorial(m) -> int:
    out = 1
    for v in m:
        out *= math.factorial(v)
    return out


def _check_degree(n: int, m: ExponentVector) -> None:
    if sum(m) != n:
        raise InvalidCardinalityError(f"exponent total {sum(m)} must equal the number of factors {n}")


def exponent_vectors(n: int, d: int):
    """All ``m`` in ``Z_{>=0}^d`` with total ``n``, in lexicographic order."""
    for bars in itertools.combinations(range(n + d - 1), d - 1):
        prev, out = -1, []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(n + d - 1 - prev - 1)
        yield tuple(out)


class SparsePolynomial:
    """Map from exponent vectors to complex coefficients."""

    def __init__(self, d: int, terms: dict[ExponentVector, complex] | None = None):
        self.d = d
        self.terms: dict[ExponentVector, complex] = dict(terms or {})

    def coeff(self, m) -> complex:
        return self.terms.get(as_exponent(m, self.d), 0j)

    def degrees(self) -> set[int]:
        return {sum(m) for m in self.terms}

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"SparsePolynomial(d={self.d}, terms={len(self.terms)})"


def expand_product(z, budget: int = DEFAULT_TERM_BUDGET) -> SparsePolynomial:
    """Multiply out ``prod_j (sum_k z_jk x_k)`` one factor at a time."""
    a = as_complex_matrix(z)
    n, d = a.shape
    if d == 0:
        raise ShapeError("need at least one variable")
    if comb(n + d - 1, d - 1) > budget:
        raise SizeExceededError(f"expansion has up to C({n + d - 1},{d - 1}) terms, over budget {budget}")
    unit = [tuple(1 if i == k else 0 for i in range(d)) for k in range(d)]
    terms: dict[ExponentVector, complex] = {(0,) * d: 1 + 0j}
    for j in range(n):
        row = a[j]
        nxt: dict[ExponentVector, complex] = {}
        for mono, c in terms.items():
            for k in range(d):
                key = tuple(x + y for x, y in zip(mono, unit[k]))
                nxt[key] = nxt.get(key, 0j) + c * complex(row[k])
        terms = nxt
    return SparsePolynomial(d, terms)


def repeat_columns(z, m, t=None) -> np.ndarray:
    """``Z'`` with column ``t(r)`` of ``Z`` in position ``r``; ``t`` defaults to sorted order."""
    a = as_complex_matrix(z)
    m = as_exponent(m, a.shape[1])
    if t is None:
        t = [k for k, mk in enumerate(m) for _ in range(mk)]
    t = list(t)
    if Counter(t) != Counter({k: mk for k, mk in enumerate(m) if mk}):
        raise ShapeError("column map t must use column k exactly m_k times")
    return a[:, t]


def coeff_via_permanent(z, m, t=None) -> complex:
    """Coefficient of ``x^m`` as ``per(Z') / m!``."""
    a = as_complex_matrix(z)
    m = as_exponent(m, a.shape[1])
    _check_degree(a.shape[0], m)
    return per_ryser(repeat_columns(a, m, t)) / multi_factorial(m)


def log_coeff_bound(z, m) -> float:
    a = as_complex_matrix(z)
    m = as_exponent(m, a.shape[1])
    n = a.shape[0]
    _check_degree(n, m)
    sq = a.real ** 2 + a.imag ** 2
    total = lgamma(n + 1) - sum(lgamma(v + 1) for v in m)
    for k, mk in enumerate(m):
        if mk == 0:
            continue
        total += 0.5 * (log_esym(sq[:, k], mk) - math.log(comb(n, mk)))
    return total


def coeff_bound(z, m) -> float:
    """``(n!/m!) prod_{k: m_k > 0} (e_{m_k}(|z_{., k}|^2) / C(n, m_k))^(1/2)``."""
    v = log_coeff_bound(z, m)
    return 0.0 if v == -math.inf else math.exp(v)


def weight_count(n: int, m) -> int:
    """Number of sequences in ``{1..d}^n`` with weight ``m``: ``n! / m!``."""
    m = as_exponent(m)
    _check_degree(n, m)
    return math.factorial(n) // multi_factorial(m)


def weight_count_enumerated(n: int, m) -> int:
    m = as_exponent(m)
    _check_degree(n, m)
    target = Counter({k: v for k, v in enumerate(m) if v})
    return sum(1 for s in itertools.product(range(len(m)), repeat=n) if Counter(s) == target)


def classify_coeff_equality(z, m, tol: float = 1e-9) -> frozenset[str]:
    """Sufficient conditions for equality in the coefficient bound.

    ``"A"``: some ``k`` with ``m_k >= 1`` has at least ``n - m_k + 1`` zero
    entries in column ``k``. ``"B"``: ``z_jk = xi_j y_k`` with unit ``xi_j``
    and nonzero ``y_k`` on the columns with ``m_k >= 1``.
    """
    a = as_complex_matrix(z)
    m = as_exponent(m, a.shape[1])
    n = a.shape[0]
    mod = np.abs(a)
    scale = float(np.max(mod)) if mod.size else 0.0
    out = set()
    for k, mk in enumerate(m):
        if mk >= 1 and int(np.sum(mod[:, k] <= tol * scale)) >= n - mk + 1:
            out.add("A")
    used = [k for k, mk in enumerate(m) if mk >= 1]
    sub = a[:, used]
    if scale > 0 and sub.size and np.min(np.abs(sub)) > tol * scale:
        y = sub[0]
        xi = sub[:, 0] / y[0]
        if np.all(np.abs(np.abs(xi) - 1) <= tol) and np.all(
            np.abs(sub - np.outer(xi, y)) <= tol * scale
        ):
            out.add("B")
    return frozenset(out)
