import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from permabound import _ryser_py
from permabound.core import ContainmentError, InvalidCardinalityError, ShapeError, SizeExceededError, iter_masks
from permabound.permanent import (
    BACKEND,
    chunk_plan,
    laplace_expand,
    per_naive,
    per_ryser,
    per_sub,
    permanent,
    row_subset_permanents,
)

from conftest import brute_permanent, complex_normal


def test_identity_and_ones():
    assert per_ryser(np.eye(3)) == 1
    assert per_ryser(np.ones((4, 4))) == 24
    assert per_naive(np.ones((4, 4))) == 24


def test_empty_matrix_has_permanent_one():
    assert per_ryser(np.zeros((0, 0))) == 1


def test_two_by_two():
    z = np.array([[1 + 1j, 2], [3, 4 - 2j]])
    assert per_ryser(z) == pytest.approx(z[0, 0] * z[1, 1] + z[0, 1] * z[1, 0])


@pytest.mark.parametrize("n", range(1, 8))
def test_ryser_matches_brute_force(n, rng):
    for _ in range(5):
        z = complex_normal(rng, (n, n))
        ref = brute_permanent(z)
        assert abs(per_ryser(z) - ref) <= 1e-10 * max(1.0, abs(ref))
        assert abs(per_naive(z) - ref) <= 1e-10 * max(1.0, abs(ref))


@pytest.mark.parametrize("n", [1, 3, 8, 13, 14])
def test_fallback_kernel_matches_compiled(n, rng):
    z = complex_normal(rng, (n, n))
    at = np.ascontiguousarray(z.T)
    py = sum(_ryser_py.ryser_range(at, lo, hi) for lo, hi in chunk_plan(n))
    assert abs(py - per_ryser(z)) <= 1e-10 * abs(py)


def test_fallback_selected_by_environment():
    code = "import permabound.permanent as p; print(p.BACKEND)"
    env = dict(os.environ, PERMABOUND_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


def test_compiled_backend_present():
    assert BACKEND in ("cython", "python")


def test_chunk_plan_covers_range():
    for n in (1, 5, 12, 13, 20, 25):
        plan = chunk_plan(n)
        assert plan[0][0] == 0 and plan[-1][1] == 1 << n
        for (a, b), (c, _) in zip(plan, plan[1:]):
            assert b == c
        sizes = {b - a for a, b in plan}
        assert len(sizes) == 1
        size = sizes.pop()
        assert size & (size - 1) == 0
        assert all(a % size == 0 for a, _ in plan)


def test_workers_give_bitwise_identical_result(rng):
    z = complex_normal(rng, (16, 16))
    base = per_ryser(z)
    for w in (2, 3, 4):
        assert per_ryser(z, workers=w) == base


def test_caps():
    with pytest.raises(SizeExceededError):
        per_ryser(np.ones((5, 5)), cap=4)
    with pytest.raises(SizeExceededError):
        per_naive(np.ones((11, 11)))


def test_nonsquare_rejected():
    with pytest.raises(ShapeError):
        per_ryser(np.ones((2, 3)))


def test_permanent_dispatch():
    r = permanent(np.ones((3, 3)), "naive")
    assert r.value == 6 and r.n == 3 and r.algorithm.value == "naive"


def test_per_sub_selections(rng):
    z = complex_normal(rng, (6, 6))
    assert per_sub(z, 0, 0) == 1
    sub = z[np.ix_([0, 2, 5], [1, 3, 4])]
    assert abs(per_sub(z, [0, 2, 5], [1, 3, 4]) - brute_permanent(sub)) < 1e-10
    with pytest.raises(InvalidCardinalityError):
        per_sub(z, [0, 1], [0])


def test_laplace_expansion(rng):
    z = complex_normal(rng, (6, 6))
    J, L, M = [0, 1, 3, 5], [0, 2, 3, 4], [2, 4]
    ref = per_sub(z, J, L)
    assert abs(laplace_expand(z, J, L, M) - ref) <= 1e-10 * abs(ref)
    with pytest.raises(ContainmentError):
        laplace_expand(z, J, L, [1])


@pytest.mark.parametrize("cols", [[0], [1, 4], [0, 2, 3], [0, 1, 2, 3, 4]])
def test_row_subset_permanents(cols, rng):
    z = complex_normal(rng, (5, 5))
    vals = row_subset_permanents(z, cols)
    ref = [per_sub(z, J, cols) for J in iter_masks(5, len(cols))]
    assert np.allclose(vals, ref, rtol=1e-12, atol=1e-12)


def test_row_subset_permanents_batched(rng):
    z = complex_normal(rng, (3, 4, 4))
    batched = row_subset_permanents(z, [0, 2])
    for t in range(3):
        assert np.allclose(batched[t], row_subset_permanents(z[t], [0, 2]))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.just(2)).map(lambda s: (s[0], s[0])),
              elements=st.floats(-3, 3)))
def test_row_scaling_and_permutation_invariance(a):
    n = a.shape[0]
    rng = np.random.default_rng(n)
    p = rng.permutation(n)
    q = rng.permutation(n)
    base = per_ryser(a)
    assert abs(per_ryser(a[p][:, q]) - base) <= 1e-9 * (1 + abs(base))
    assert abs(per_ryser(a.T) - base) <= 1e-9 * (1 + abs(base))
    scaled = a.copy()
    scaled[0] *= 2.5
    assert abs(per_ryser(scaled) - 2.5 * base) <= 1e-9 * (1 + abs(base))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_nonnegative_matrix_has_nonnegative_permanent(n, seed):
    a = np.random.default_rng(seed).random((n, n))
    assert per_ryser(a).real >= 0
