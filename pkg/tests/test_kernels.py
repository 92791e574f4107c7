import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlsym import _kernels as K
from nlsym.cyclotomic import reduction_table
from nlsym.groups import AbelianGroup

needs_numba = pytest.mark.skipif(not K.HAS_NUMBA, reason="numba backend not active")
GROUPS = ["Z4", "Z5", "Z6", "Z2xZ2", "Z2xZ4", "Z3xZ3"]


def test_permutations_array():
    P = K.permutations_array(4)
    assert P.shape == (24, 4)
    assert [tuple(r) for r in P] == list(itertools.permutations(range(4)))
    assert np.all(K.permutations_array(5, fix_first=True)[:, 0] == 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 7), st.data())
def test_lehmer_round_trip(n, data):
    r = data.draw(st.integers(0, math.factorial(n) - 1))
    perm = K.lehmer_unrank(r, n)
    assert int(K.lehmer_rank_np(perm[None])[0]) == r
    assert int(K.lehmer_rank(perm[None])[0]) == r


def test_lehmer_rank_is_lexicographic_index():
    P = K.permutations_array(6)
    assert np.array_equal(K.lehmer_rank_np(P), np.arange(720))


@needs_numba
@pytest.mark.parametrize("lit", GROUPS)
def test_diff_counts_backends_agree(lit):
    G = AbelianGroup.parse(lit)
    perms = K.permutations_array(G.order)[::7][:200]
    assert np.array_equal(K.diff_counts_np(perms, G.add_table, G.diff_table),
                          K.diff_counts(perms, G.add_table, G.diff_table))


@needs_numba
@settings(max_examples=30, deadline=None)
@given(st.sampled_from(GROUPS), st.data())
def test_char_matrix_backends_agree(lit, data):
    G = AbelianGroup.parse(lit)
    pi = np.array(data.draw(st.permutations(range(G.order))))
    N = G.exponent
    E = G.exponent_table
    h_np = K.char_histogram_np(pi, E, N)
    assert np.array_equal(h_np, K.char_histogram(pi, E, N))
    R = reduction_table(N)
    assert np.array_equal(K.autocorr_reduce_np(h_np, R), K.autocorr_reduce(h_np, R))


@needs_numba
@settings(max_examples=20, deadline=None)
@given(st.integers(3, 6), st.integers(0, 2 ** 32 - 1))
def test_perm_values_backends_agree(n, seed):
    H = np.random.default_rng(seed).integers(-9, 10, size=(n,) * 4).astype(np.int64)
    P = K.permutations_array(n)
    assert np.array_equal(K.perm_values_np(H, P), K.perm_values(H, P))


def test_perm_values_on_object_arrays():
    H = np.empty((3,) * 4, dtype=object)
    H[...] = 0
    H[1, 0, 0, 1] = 5
    vals = K.perm_values(H, K.permutations_array(3))
    # only permutations sending 0 -> 1 and 1 -> 0 pick up the entry
    assert list(vals) == [0, 0, 5, 0, 0, 0]
