import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permabound.core import ColumnPartition, InvalidCardinalityError, ShapeError
from permabound.sympoly import compute_alpha, esym, esym_all, log_esym, maclaurin_mean


def esym_oracle(y, m):
    return math.fsum(math.prod(c) for c in itertools.combinations(y, m))


weights = st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=9)


@given(weights, st.data())
def test_esym_matches_enumeration(y, data):
    m = data.draw(st.integers(0, len(y)))
    ref = esym_oracle(y, m)
    assert esym(y, m) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_small_values():
    assert esym([1, 2, 3], 0) == 1
    assert esym([1, 2, 3], 2) == 11
    assert esym([1, 2, 3], 3) == 6
    assert list(esym_all([1, 2, 3], 3)) == [1, 6, 11, 6]


def test_zero_weights():
    assert esym([0, 0, 5], 2) == 0
    assert log_esym([0, 0, 5], 2) == -math.inf


def test_log_domain_large_values():
    y = np.full(200, 1e10)
    expected = math.log(math.comb(200, 100)) + 100 * math.log(1e10)
    assert log_esym(y, 100) == pytest.approx(expected, rel=1e-12)
    assert esym(y, 100) == math.inf
    assert esym(np.full(40, 1e10), 20) == pytest.approx(math.comb(40, 20) * 1e200, rel=1e-12)


def test_rejects_bad_input():
    with pytest.raises(ShapeError):
        esym([-1, 2], 1)
    with pytest.raises(ShapeError):
        esym([np.nan], 1)
    with pytest.raises(InvalidCardinalityError):
        esym([1, 2], 3)
    with pytest.raises(InvalidCardinalityError):
        maclaurin_mean([1, 2], 0)


@settings(max_examples=80)
@given(st.lists(st.floats(0, 5), min_size=2, max_size=8))
def test_maclaurin_chain(y):
    n = len(y)
    vals = [maclaurin_mean(y, m) ** (1 / m) for m in range(1, n + 1)]
    for a, b in zip(vals, vals[1:]):
        assert b <= a * (1 + 1e-9) + 1e-12


def test_alpha_block_means(rng):
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    p = ColumnPartition.from_groups([[0, 3], [1], [2]], 4)
    alpha = compute_alpha(z, p).alpha
    sq = np.abs(z) ** 2
    assert np.allclose(alpha[:, 0], (sq[:, 0] + sq[:, 3]) / 2)
    assert np.allclose(alpha[:, 1], sq[:, 1])
    assert alpha.shape == (4, 3)
