import itertools
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permabound.convolution import (
    ProductSetFunction,
    SetFunction,
    classify_equality,
    coefficient_c,
    coefficient_c_alt,
    coefficient_f,
    conv_coefficients,
    conv_m,
    conv_table,
    f_positive_expected,
    master_inequality_batch,
    master_inequality_check,
    pfaff_saalschutz_check,
    probe_general_g,
)
from permabound.core import InvalidCardinalityError, iter_masks, mask_indices, subset_rank


def conv_oracle(g, h, n, m, J):
    """Direct sum over m-subsets I of J of g(I) h(J minus I)."""
    members = mask_indices(J)
    total = 0.0
    for I in itertools.combinations(members, m):
        Im = sum(1 << i for i in I)
        total += g(Im) * h(J & ~Im)
    return total


def test_set_function_lookup():
    h = SetFunction.from_callable(4, 2, lambda mask: float(mask))
    assert h(0b0101) == 5.0
    assert h([1, 3]) == 10.0
    with pytest.raises(InvalidCardinalityError):
        h(0b1)


def test_product_set_function():
    g = ProductSetFunction([2.0, 3.0, 5.0])
    assert g(0b101) == 10.0
    assert g(0) == 1.0
    assert list(g.table(2)) == [6.0, 10.0, 15.0]


def test_general_g_refused():
    h = SetFunction.constant(3, 1, 1.0)
    with pytest.raises(TypeError):
        conv_m(SetFunction.constant(3, 1, 1.0), h, 1, 0b011)


@pytest.mark.parametrize("n,l,m", [(4, 2, 1), (5, 3, 2), (5, 5, 2), (6, 4, 0), (6, 4, 4)])
def test_conv_matches_direct_sum(n, l, m, rng):
    g = ProductSetFunction(rng.exponential(size=n))
    h = SetFunction(n, l - m, rng.exponential(size=comb(n, l - m)))
    tab = conv_table(g.table(m), h.table, n, l, m)
    for J in iter_masks(n, l):
        ref = conv_oracle(g, h, n, m, J)
        assert conv_m(g, h, m, J) == pytest.approx(ref, rel=1e-12)
        assert tab[subset_rank(J)] == pytest.approx(ref, rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 8), st.data())
def test_master_inequality_random(n, data):
    l = data.draw(st.integers(0, n))
    m = data.draw(st.integers(0, l))
    seed = data.draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    g = ProductSetFunction(rng.exponential(size=n) * rng.integers(0, 2, size=n))
    h = SetFunction(n, l - m, rng.exponential(size=comb(n, l - m)))
    rep = master_inequality_check(g, h, n, l, m)
    assert rep.holds, rep


def test_batch_matches_single(rng):
    n, l, m = 6, 4, 2
    gw = rng.exponential(size=(5, n))
    ht = rng.exponential(size=(5, comb(n, l - m)))
    lhs, rhs = master_inequality_batch(gw, ht, n, l, m)
    for t in range(5):
        rep = master_inequality_check(ProductSetFunction(gw[t]), SetFunction(n, l - m, ht[t]), n, l, m)
        assert lhs[t] == pytest.approx(rep.lhs, rel=1e-13)
        assert rhs[t] == pytest.approx(rep.rhs, rel=1e-13)


def _tight(g, h, n, l, m):
    rep = master_inequality_check(g, h, n, l, m)
    return abs(rep.lhs - rep.rhs) <= 1e-12 * max(rep.rhs, 1e-300)


def test_equality_condition_i(rng):
    n = 5
    for l in range(n + 1):
        for m in {0, l}:
            g = ProductSetFunction(rng.exponential(size=n))
            h = SetFunction(n, l - m, rng.exponential(size=comb(n, l - m)))
            assert "i" in classify_equality(g, h, n, l, m)
            assert _tight(g, h, n, l, m)


def test_equality_condition_ii(rng):
    n, l, m = 6, 4, 2
    w = np.zeros(n)
    w[3] = 2.0
    g = ProductSetFunction(w)
    h = SetFunction(n, l - m, rng.exponential(size=comb(n, l - m)))
    assert "ii" in classify_equality(g, h, n, l, m)
    rep = master_inequality_check(g, h, n, l, m)
    assert rep.lhs == 0 and rep.rhs == 0


def test_equality_condition_iii(rng):
    n, l, m = 6, 4, 2
    g = ProductSetFunction(rng.exponential(size=n))
    h = SetFunction.constant(n, l - m, 0.0)
    assert "iii" in classify_equality(g, h, n, l, m)
    rep = master_inequality_check(g, h, n, l, m)
    assert rep.lhs == 0 and rep.rhs == 0


def test_equality_condition_iv(rng):
    n, m = 5, 2
    g = ProductSetFunction(rng.exponential(size=n))
    x = 1.7
    full = (1 << n) - 1
    h = SetFunction.from_callable(n, n - m, lambda K: g(full & ~K) / x)
    assert "iv" in classify_equality(g, h, n, n, m)
    assert _tight(g, h, n, n, m)


def test_equality_condition_v():
    n, l, m = 7, 5, 2
    g = ProductSetFunction(np.full(n, 0.8))
    h = SetFunction.constant(n, l - m, 2.5)
    assert "v" in classify_equality(g, h, n, l, m)
    assert _tight(g, h, n, l, m)


def test_generic_case_has_no_condition(rng):
    n, l, m = 6, 4, 2
    g = ProductSetFunction(rng.exponential(size=n) + 0.1)
    h = SetFunction(n, l - m, rng.exponential(size=comb(n, l - m)) + 0.1)
    assert classify_equality(g, h, n, l, m) == frozenset()


def test_probe_general_g_returns_sides(rng):
    lhs, rhs = probe_general_g(rng.exponential(size=comb(5, 2)), rng.exponential(size=comb(5, 1)), 5, 3, 2)
    assert lhs >= 0 and rhs >= 0


def test_coefficient_examples():
    for n in range(1, 13):
        for l in range(1, n + 1):
            assert coefficient_c(l, 1, n) == Fraction(l * (n - l + 1), n)
        for m in range(n + 1):
            assert coefficient_c(n, m, n) == 1
    assert coefficient_f(1, 1, 2, 0, 0) == Fraction(1, 2)
    assert coefficient_f(1, 1, 2, 0, 1) == Fraction(1, 2)


def test_single_case_normalization():
    co = conv_coefficients(1, 1, 1)
    assert co.C == 1
    # the a = 0 normalization sum: f(0,0) C(1,0)^2 + f(0,1) C(1,1)^2
    assert co.f[0, 0] + co.f[0, 1] == 1
    assert co.f[1, 0] == 1


@pytest.mark.parametrize("n", range(1, 13))
def test_identities_exact(n):
    for l in range(n + 1):
        for m in range(l + 1):
            co = conv_coefficients(l, m, n)
            assert coefficient_c_alt(l, m, n) == co.C
            for (a, b), v in co.f.items():
                assert v >= 0
                assert (v > 0) == f_positive_expected(l, m, n, a, b)


def test_identity_inputs_validated():
    with pytest.raises(InvalidCardinalityError):
        conv_coefficients(2, 3, 4)
    with pytest.raises(InvalidCardinalityError):
        coefficient_f(3, 2, 4, 2, 1)


def test_pfaff_saalschutz_grid():
    for x in range(-5, 11):
        for y in range(-5, 11):
            for m in range(7):
                for n in range(7):
                    assert pfaff_saalschutz_check(x, y, m, n).equal


@given(st.fractions(-10, 10, max_denominator=15), st.fractions(-10, 10, max_denominator=15),
       st.integers(0, 6), st.integers(0, 6))
def test_pfaff_saalschutz_rational(x, y, m, n):
    rep = pfaff_saalschutz_check(x, y, m, n)
    assert rep.lhs == rep.rhs
