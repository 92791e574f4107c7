import cmath
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nlsym.cyclotomic import (Cyclotomic, Sign, abs_squared, cyclotomic_polynomial, golden_ratio,
                              real_sign, reduction_table, sqrt5, totient)

ORDERS = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12]


def z(order, k=1):
    return Cyclotomic.root(order, k)


def approx(x):
    return complex(x)


@st.composite
def elements(draw, order=None):
    n = order or draw(st.sampled_from(ORDERS))
    coeffs = draw(st.lists(st.integers(-6, 6), min_size=n, max_size=n))
    den = draw(st.integers(1, 7))
    return Cyclotomic(n, coeffs, den)


def value(c: Cyclotomic) -> complex:
    return sum(Fraction(a) * cmath.exp(2j * cmath.pi * k / c.order) for k, a in enumerate(c.coefficients()))


def test_totient_and_polynomials():
    assert [totient(n) for n in (1, 2, 3, 4, 5, 6, 8, 9, 10, 12)] == [1, 1, 2, 2, 4, 2, 4, 6, 4, 4]
    assert cyclotomic_polynomial(5) == (1, 1, 1, 1, 1)
    assert cyclotomic_polynomial(6) == (1, -1, 1)
    assert cyclotomic_polynomial(8) == (1, 0, 0, 0, 1)


@pytest.mark.parametrize("n", ORDERS)
def test_reduction_table_matches_roots(n):
    R = reduction_table(n)
    d = totient(n)
    for k in range(n):
        lhs = cmath.exp(2j * cmath.pi * k / n)
        rhs = sum(int(R[k, m]) * cmath.exp(2j * cmath.pi * m / n) for m in range(d))
        assert abs(lhs - rhs) < 1e-12


def test_zeta6_is_one_plus_zeta3():
    assert z(6) == 1 + z(3)
    assert abs(approx(z(6)) - approx(1 + z(3))) < 1e-12


def test_root_sum_vanishes():
    for n in ORDERS[1:]:
        assert sum((z(n, k) for k in range(n)), Cyclotomic.rational(0)) == 0


def test_sqrt5_and_golden_ratio():
    s = sqrt5()
    assert s * s == 5
    phi = golden_ratio()
    assert phi * phi == phi + 1
    assert abs(float(phi) - (1 + 5 ** 0.5) / 2) < 1e-12


def test_real_sign_of_close_values():
    # (5 - 3 sqrt5)/50 < 0 although small
    v = (5 - 3 * sqrt5()) / 50
    assert real_sign(v) == Sign.NEGATIVE
    assert real_sign(Fraction(0)) == Sign.ZERO
    assert real_sign(sqrt5() - Fraction(2236, 1000)) == Sign.POSITIVE
    assert real_sign(sqrt5() - Fraction(2237, 1000)) == Sign.NEGATIVE


def test_json_round_trip():
    x = (3 * z(5) - z(5, 3)) / 7
    assert Cyclotomic.from_json(x.to_json()) == x


@settings(max_examples=150, deadline=None)
@given(elements(), elements())
def test_arithmetic_matches_complex_numbers(x, y):
    assert abs(approx(x + y) - (value(x) + value(y))) < 1e-9
    assert abs(approx(x - y) - (value(x) - value(y))) < 1e-9
    assert abs(approx(x * y) - value(x) * value(y)) < 1e-8


@settings(max_examples=100, deadline=None)
@given(elements())
def test_inverse_and_conjugate(x):
    if x == 0:
        return
    assert x * x.inverse() == 1
    assert abs(approx(x.conj()) - value(x).conjugate()) < 1e-9
    sq = abs_squared(x)
    assert sq.is_real()
    assert real_sign(sq) == Sign.POSITIVE


@settings(max_examples=100, deadline=None)
@given(elements(order=5), st.integers(1, 4))
def test_galois_is_a_ring_map(x, k):
    y = x * x + 1
    assert y.galois(k) == x.galois(k) * x.galois(k) + 1


@settings(max_examples=100, deadline=None)
@given(elements())
def test_real_sign_agrees_with_float(x):
    r = (x + x.conj()) / 2
    f = r.approx.real
    s = real_sign(r)
    if abs(f) > 1e-9:
        assert s == (Sign.POSITIVE if f > 0 else Sign.NEGATIVE)
    if s == Sign.ZERO:
        assert abs(f) < 1e-12


@settings(max_examples=60, deadline=None)
@given(elements(order=4), st.sampled_from([8, 12]))
def test_lift_preserves_value(x, m):
    y = x.lift(m)
    assert y.order == m and y == x
    assert abs(approx(y) - value(x)) < 1e-9
