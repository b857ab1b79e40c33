import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permabound.core import InvalidCardinalityError, ShapeError, SizeExceededError
from permabound.linforms import (
    classify_coeff_equality,
    coeff_bound,
    coeff_via_permanent,
    expand_product,
    exponent_vectors,
    repeat_columns,
    weight_count,
    weight_count_enumerated,
)
from permabound.permanent import per_ryser

from conftest import complex_normal


def coeff_oracle(z, m):
    """Sum over all choices of one column per row with the right multiset."""
    n, d = z.shape
    total = 0j
    for s in itertools.product(range(d), repeat=n):
        if all(s.count(k) == m[k] for k in range(d)):
            total += np.prod([z[j, s[j]] for j in range(n)])
    return total


def test_exponent_vectors():
    vs = list(exponent_vectors(3, 2))
    assert vs == [(0, 3), (1, 2), (2, 1), (3, 0)]
    assert len(list(exponent_vectors(5, 3))) == math.comb(7, 2)


def test_all_ones_exponent_gives_permanent(rng):
    z = complex_normal(rng, (5, 5))
    assert coeff_via_permanent(z, [1] * 5) == pytest.approx(per_ryser(z), rel=1e-12)


def test_small_oracle(rng):
    z = complex_normal(rng, (4, 3))
    poly = expand_product(z)
    for m in exponent_vectors(4, 3):
        ref = coeff_oracle(z, m)
        assert abs(poly.coeff(m) - ref) <= 1e-12 * (1 + abs(ref))
        assert abs(coeff_via_permanent(z, m) - ref) <= 1e-10 * (1 + abs(ref))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_permanent_route_matches_expansion_and_bound(n, d, seed):
    rng = np.random.default_rng(seed)
    z = complex_normal(rng, (n, d))
    poly = expand_product(z)
    assert poly.degrees() == {n}
    for m in exponent_vectors(n, d):
        c = coeff_via_permanent(z, m)
        e = poly.coeff(m)
        assert abs(c - e) <= 1e-10 * max(1.0, abs(e))
        assert abs(c) <= coeff_bound(z, m) * (1 + 1e-12) + 1e-300


def test_zero_block_is_skipped(rng):
    z = complex_normal(rng, (4, 3))
    m = (2, 0, 2)
    sq = np.abs(z) ** 2
    e2 = lambda v: sum(a * b for a, b in itertools.combinations(v, 2))
    expected = math.factorial(4) / 4 * math.sqrt(e2(sq[:, 0]) / 6 * e2(sq[:, 2]) / 6)
    assert coeff_bound(z, m) == pytest.approx(expected, rel=1e-12)
    assert coeff_via_permanent(z, m) == pytest.approx(expand_product(z).coeff(m), rel=1e-10)


def test_column_map_choice_is_irrelevant(rng):
    z = complex_normal(rng, (4, 2))
    a = coeff_via_permanent(z, (2, 2), t=[0, 0, 1, 1])
    b = coeff_via_permanent(z, (2, 2), t=[1, 0, 1, 0])
    assert a == pytest.approx(b, rel=1e-12)
    with pytest.raises(ShapeError):
        repeat_columns(z, (2, 2), t=[0, 0, 0, 1])


def test_equality_rank_one_phase(rng):
    for _ in range(20):
        n, d = 5, 3
        z = np.outer(np.exp(2j * np.pi * rng.random(n)), rng.uniform(0.5, 2, d))
        for m in exponent_vectors(n, d):
            assert abs(coeff_via_permanent(z, m)) == pytest.approx(coeff_bound(z, m), rel=1e-12)
            assert "B" in classify_coeff_equality(z, m)


def test_equality_zero_column():
    z = np.ones((4, 2))
    z[1:, 0] = 0
    assert "A" in classify_coeff_equality(z, (2, 2))
    assert abs(coeff_via_permanent(z, (2, 2))) == 0
    assert coeff_bound(z, (2, 2)) == 0


def test_weight_counts():
    for n in range(1, 6):
        for m in exponent_vectors(n, 3):
            assert weight_count(n, m) == weight_count_enumerated(n, m)


def test_degree_mismatch(rng):
    with pytest.raises(InvalidCardinalityError):
        coeff_via_permanent(complex_normal(rng, (3, 2)), (1, 1))
    with pytest.raises(ShapeError):
        coeff_bound(complex_normal(rng, (3, 2)), (3,))


def test_expansion_budget():
    with pytest.raises(SizeExceededError):
        expand_product(np.ones((30, 10)), budget=1000)
