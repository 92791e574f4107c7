from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from nlsym.cyclotomic import Sign, real_sign
from nlsym.lp import ExactRHS, decide_membership, exact_phase1, independent_rows


def scipy_feasible(A, b) -> bool:
    res = linprog(np.zeros(A.shape[1]), A_eq=A.astype(float), b_eq=b, bounds=(0, None), method="highs")
    return res.status == 0


def rational_rhs(vals):
    den = 1
    for v in vals:
        den = den * v.denominator // np.gcd(den, v.denominator)
    T = np.array([[int(v * den)] for v in vals], dtype=np.int64)
    return ExactRHS(1, den, T)


def check(A, rhs, res):
    m, V = A.shape
    if res.status == "LOCAL":
        tot = [sum((w * int(A[i, j]) for j, w in res.weights.items()), Fraction(0)) for i in range(m)]
        for i in range(m):
            assert tot[i] == rhs.value(i)
        assert all(real_sign(w) != Sign.NEGATIVE for w in res.weights.values())
    else:
        h = res.h
        vals = [sum((hi * int(A[i, j]) for i, hi in enumerate(h)), Fraction(0)) for j in range(V)]
        assert min(vals) == res.offset
        assert real_sign(res.value - res.offset) == Sign.NEGATIVE


@st.composite
def instances(draw):
    m = draw(st.integers(1, 5))
    V = draw(st.integers(2, 9))
    A = np.array(draw(st.lists(st.lists(st.integers(0, 3), min_size=V, max_size=V), min_size=m, max_size=m)))
    A = np.vstack([A, np.ones(V, dtype=np.int64)])
    inside = draw(st.booleans())
    if inside:
        w = draw(st.lists(st.integers(0, 5), min_size=V, max_size=V).filter(lambda x: sum(x) > 0))
        s = sum(w)
        b = [sum((Fraction(wj * int(A[i, j]), s) for j, wj in enumerate(w)), Fraction(0)) for i in range(m)]
    else:
        b = [Fraction(draw(st.integers(-2, 8)), draw(st.integers(1, 4))) for _ in range(m)]
    return A, b + [Fraction(1)]


@settings(max_examples=150, deadline=None)
@given(instances())
def test_membership_agrees_with_scipy(inst):
    A, b = inst
    rhs = rational_rhs(b)
    res = decide_membership(A, rhs)
    check(A, rhs, res)
    assert (res.status == "LOCAL") == scipy_feasible(A, np.array([float(x) for x in b]))


@settings(max_examples=60, deadline=None)
@given(instances())
def test_exact_simplex_agrees_with_float_route(inst):
    A, b = inst
    rhs = rational_rhs(b)
    status, _ = exact_phase1(A, rhs)
    assert status == decide_membership(A, rhs).status


def test_irrational_rhs():
    # sqrt5 = 1 + 2 z + 2 z^4 with z a primitive 5th root; columns (0) and (1) span [0, 1]
    A = np.array([[0, 1], [1, 1]])
    root5 = np.array([100, 200, 0, 0, 200])
    for sgn, shift, inside in ((1, -200, True), (1, -300, False), (-1, 300, True), (1, -224, False), (1, -223, True)):
        T = np.zeros((2, 5), dtype=np.int64)
        T[0] = sgn * root5
        T[0, 0] += shift
        T[1, 0] = 100
        rhs = ExactRHS(5, 100, T)
        res = decide_membership(A, rhs)
        assert (res.status == "LOCAL") == inside
        check(A, rhs, res)
        status, _ = exact_phase1(A, rhs)
        assert (status == "LOCAL") == inside


def test_normalization_row_required():
    with pytest.raises(ValueError):
        decide_membership(np.array([[1, 0], [0, 1]]), rational_rhs([Fraction(1), Fraction(0)]))


def test_degenerate_vertex():
    # b is exactly a column: feasible, single weight 1
    A = np.array([[1, 0, 2], [0, 1, 2], [1, 1, 1]])
    rhs = rational_rhs([Fraction(2), Fraction(2), Fraction(1)])
    res = decide_membership(A, rhs)
    assert res.status == "LOCAL" and res.weights == {2: 1}


def test_inconsistent_dependent_row():
    # row 1 is twice row 0 but b disagrees; the kept rows alone are feasible
    A = np.array([[1, 0], [2, 0], [1, 1]])
    rhs = rational_rhs([Fraction(1, 2), Fraction(1, 2), Fraction(1)])
    res = decide_membership(A, rhs)
    assert res.status == "NONLOCAL" and res.method == "inconsistent dependent row"
    check(A, rhs, res)


def test_rank_deficient_rows_are_reduced():
    A = np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 1, 1, 1], [1, 1, 1, 1]])
    # row0 + row1 is the ones row
    assert independent_rows(A) == [0, 3]
