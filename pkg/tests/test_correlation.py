import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlsym.correlation import (CharacteristicMatrix, Correlation, compose, deterministic, from_characteristic,
                               identity_matrix, is_group_invariant, swap_io, to_characteristic,
                               uniform_group_correlation, validate)
from nlsym.errors import IndexMismatch
from nlsym.groups import AbelianGroup
from nlsym.qls import characteristic_matrix, qls_correlation

perms4 = st.permutations(range(4))


def test_deterministic_is_valid():
    p = deterministic([2, 0, 1])
    assert validate(p) == []
    assert p(2, 0, 0, 1) == 1 and p(0, 2, 0, 1) == 0


@settings(max_examples=50, deadline=None)
@given(perms4, perms4)
def test_compose_of_deterministic(a, b):
    # (p_a o p_b) = p_{a o b}
    ab = [a[b[x]] for x in range(4)]
    assert compose(deterministic(a), deterministic(b)).same_as(deterministic(ab))


def test_compose_rejects_mismatched_labels():
    with pytest.raises(IndexMismatch):
        compose(deterministic([0, 1]), deterministic([0, 1, 2]))


def test_swap_io_is_inverse_for_deterministic():
    p = deterministic([1, 2, 0])
    assert swap_io(p).same_as(deterministic([2, 0, 1]))


def test_validate_reports_each_condition():
    p = deterministic([0, 1, 2])
    t = p.exact.copy()
    t[0, 1, 0, 0] = Fraction(1, 2)
    t[0, 0, 0, 0] = Fraction(1, 2)
    problems = {v.condition for v in validate(Correlation.from_exact(range(3), t))}
    assert "bisynchronous" in problems
    t = p.exact.copy()
    t[0, 0, 0, 0] = Fraction(2)
    problems = {v.condition for v in validate(Correlation.from_exact(range(3), t))}
    assert "normalization" in problems or "marginal" in problems


def test_uniform_group_correlation():
    G = AbelianGroup.parse("Z2xZ2")
    p = uniform_group_correlation(G)
    assert validate(p) == []
    assert is_group_invariant(p, G)


@pytest.mark.parametrize("lit", ["Z5", "Z6"])
def test_characteristic_matrix_is_multiplicative(lit):
    # D^{p o p'} = D^p D^{p'}
    G = AbelianGroup.parse(lit)
    rng = np.random.default_rng(7)
    for _ in range(4):
        a = list(rng.permutation(G.order))
        b = list(rng.permutation(G.order))
        p, q = qls_correlation(G, a), qls_correlation(G, b)
        lhs = to_characteristic(compose(p, q), G)
        rhs = characteristic_matrix(G, a) @ characteristic_matrix(G, b)
        assert lhs == rhs


def test_characteristic_round_trip():
    G = AbelianGroup.parse("Z5")
    D = characteristic_matrix(G, [0, 1, 2, 4, 3])
    p = from_characteristic(D)
    assert to_characteristic(p, G) == D
    assert D.is_doubly_stochastic() and not D.is_permutation()
    assert identity_matrix(G).is_permutation()


def test_characteristic_json_round_trip():
    G = AbelianGroup.parse("Z6")
    D = characteristic_matrix(G, [0, 2, 1, 3, 5, 4])
    assert CharacteristicMatrix.from_json(json.loads(json.dumps(D.to_json()))) == D


def test_correlation_json_round_trip_exact_and_float():
    G = AbelianGroup.parse("Z5")
    p = qls_correlation(G, [0, 1, 2, 4, 3])
    q = Correlation.from_json(json.loads(p.dumps()))
    assert q.same_as(p) and q.exact is not None
    f = Correlation.from_float(p.labels, p.approx)
    g = Correlation.from_json(json.loads(f.dumps()))
    assert g.numeric_only and np.allclose(g.approx, p.approx)


def test_numeric_only_validation_uses_tolerance():
    p = deterministic([1, 0, 2])
    noisy = Correlation.from_float(p.labels, p.approx + 1e-12)
    assert validate(noisy) == []
    bad = Correlation.from_float(p.labels, p.approx * 0.5)
    assert validate(bad)


def test_group_invariance_detects_non_invariant():
    G = AbelianGroup.parse("Z5")
    assert not is_group_invariant(deterministic([0, 2, 1, 3, 4]), G)
    assert is_group_invariant(qls_correlation(G, [0, 1, 2, 4, 3]), G)


def test_from_tensor_rational_cache_is_canonical():
    T = np.zeros((2, 2, 2, 2, 1), dtype=np.int64)
    for i, j in itertools.product(range(2), repeat=2):
        T[i, j, i, j, 0] = 4
    p = Correlation.from_tensor(range(2), 1, 4, T, "test")
    order, den, U = p.tensor
    assert (order, den) == (1, 1) and U[0, 1, 0, 1, 0] == 1
