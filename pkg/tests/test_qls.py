import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlsym.correlation import to_characteristic, validate
from nlsym.cyclotomic import golden_ratio
from nlsym.errors import BoundExceeded
from nlsym.groups import AbelianGroup, DualPermutation
from nlsym.qls import (build_qls, characteristic_matrix, is_classical_qls, orbit_representatives,
                       qls_correlation, survey)

# exponents of omega in the order-5 square with characters 3 and 4 exchanged (factor 1/sqrt5 omitted)
K5_SQUARE = [
    [(0, 0, 0, 0, 0), (0, 4, 3, 2, 1), (0, 3, 1, 4, 2), (0, 2, 4, 1, 3), (0, 1, 2, 3, 4)],
    [(0, 1, 2, 4, 3), (0, 0, 0, 1, 4), (0, 4, 3, 3, 0), (0, 3, 1, 0, 1), (0, 2, 4, 2, 2)],
    [(0, 2, 4, 3, 1), (0, 1, 2, 0, 2), (0, 0, 0, 2, 3), (0, 4, 3, 4, 4), (0, 3, 1, 1, 0)],
    [(0, 3, 1, 2, 4), (0, 2, 4, 4, 0), (0, 1, 2, 1, 1), (0, 0, 0, 3, 2), (0, 4, 3, 0, 3)],
    [(0, 4, 3, 1, 2), (0, 3, 1, 3, 3), (0, 2, 4, 0, 4), (0, 1, 2, 2, 0), (0, 0, 0, 4, 1)],
]

K5_PI = [0, 1, 2, 4, 3]
GROUPS = ["Z2", "Z3", "Z4", "Z2xZ2", "Z5", "Z6", "Z7", "Z8", "Z2xZ4", "Z2xZ2xZ2", "Z3xZ3", "Z9", "Z10"]


def test_order5_square_exponents():
    Q = build_qls(AbelianGroup((5,)), K5_PI)
    assert [[tuple(int(k) for k in Q.exponents[a, b]) for b in range(5)] for a in range(5)] == K5_SQUARE


def test_golden_matrix():
    G = AbelianGroup((5,))
    D = characteristic_matrix(G, K5_PI)
    phi = golden_ratio()
    hi, lo = (1 + phi) / 5, (2 - phi) / 5
    f = Fraction(1, 5)
    expected = [[1, 0, 0, 0, 0],
                [0, hi, f, f, lo],
                [0, f, lo, hi, f],
                [0, f, hi, lo, f],
                [0, lo, f, f, hi]]
    for a in range(5):
        for b in range(5):
            assert D.entries[a, b] == expected[a][b]


def test_k5_values():
    p = qls_correlation(AbelianGroup((5,)), K5_PI)
    w = build_qls(AbelianGroup((5,)), K5_PI)
    from nlsym.cyclotomic import Cyclotomic
    om = Cyclotomic.root(5)
    assert p(0, 2, 0, 2) == (2 + om ** 2 + om ** 3) / 25
    assert p(0, 3, 0, 1) == Fraction(1, 25)
    assert p(0, 4, 0, 4) == (1 - om ** 2 - om ** 3) / 25
    assert w.is_orthogonal()


def _perm_strategy(n):
    return st.permutations(range(n))


@pytest.mark.parametrize("lit", ["Z4", "Z2xZ2", "Z5", "Z6", "Z2xZ4", "Z3xZ3"])
def test_two_routes_agree(lit):
    # explicit inner products vs the histogram/autocorrelation kernel
    G = AbelianGroup.parse(lit)
    rng = np.random.default_rng(3)
    for _ in range(3):
        pi = list(rng.permutation(G.order))
        Q = build_qls(G, pi)
        p1 = Q.correlation()
        p2 = qls_correlation(G, pi)
        assert p1.same_as(p2)
        assert to_characteristic(p1, G) == characteristic_matrix(G, pi)


@settings(max_examples=25, deadline=None)
@given(_perm_strategy(6))
def test_qls_is_orthogonal_and_valid(pi):
    G = AbelianGroup((6,))
    Q = build_qls(G, list(pi))
    assert Q.is_orthogonal()
    assert validate(Q.correlation()) == []


@settings(max_examples=20, deadline=None)
@given(_perm_strategy(4))
def test_projections_reproduce_correlation(pi):
    # p(l,k|i,j) = tr(u_il u_jk)/n from explicit rank-one projections
    G = AbelianGroup.parse("Z2xZ2")
    Q = build_qls(G, list(pi))
    U = Q.projections()
    n = G.order
    table = np.einsum("ilxy,jkyx->lkij", U, U).real / n
    assert np.allclose(table, Q.correlation().approx, atol=1e-12)
    for i in range(n):
        assert np.allclose(U[i].sum(axis=0), np.eye(n), atol=1e-12)


@pytest.mark.parametrize("lit", ["Z4", "Z5", "Z2xZ2"])
def test_classical_iff_affine(lit):
    G = AbelianGroup.parse(lit)
    count = 0
    for pi in itertools.permutations(range(G.order)):
        classical, _ = is_classical_qls(G, list(pi))
        count += classical
    # affine maps of the dual group: |G| |Aut(G)|
    from nlsym.groups import automorphism_group
    assert count == G.order * len(automorphism_group(G))


def test_orbit_representatives_partition():
    G = AbelianGroup.parse("Z6")
    orb = orbit_representatives(G)
    assert sum(orb.sizes) == 720


def test_orbit_count_z10():
    orb = orbit_representatives(AbelianGroup.parse("Z10"))
    assert len(orb.representatives) == 2375


@pytest.mark.parametrize("lit,counts", [("Z4", (3, 2, 3, 0)), ("Z5", (8, 4, 4, 4)), ("Z6", (20, 2, 5, 15)),
                                        ("Z2xZ2", (6, 6, 6, 0)), ("Z2", (1, 1, 1, 0)), ("Z3", (2, 2, 2, 0))])
def test_desk_surveys(lit, counts):
    assert survey(AbelianGroup.parse(lit)).counts() == counts


def test_survey_gating():
    with pytest.raises(BoundExceeded):
        survey(AbelianGroup.parse("Z7"))
    with pytest.raises(BoundExceeded):
        survey(AbelianGroup.parse("Z2xZ6"), extended=True)


def test_survey_json_round_trip():
    from nlsym.qls import SurveyReport
    rep = survey(AbelianGroup.parse("Z5"))
    back = SurveyReport.from_json(rep.to_json())
    assert back.counts() == rep.counts() and len(back.orbits) == len(rep.orbits)


def test_survey_workers_agree():
    G = AbelianGroup.parse("Z7")
    assert survey(G, extended=True, workers=2).counts() == survey(G, extended=True).counts()


@pytest.mark.parametrize("lit,counts", [("Z7", (78, 6, 12, 66)), ("Z8", (380, 4, 10, 370)),
                                        ("Z2xZ4", (460, 8, 284, 176))])
def test_extended_surveys_fast(lit, counts):
    assert survey(AbelianGroup.parse(lit), extended=True).counts() == counts


@pytest.mark.extended
@pytest.mark.parametrize("lit,counts", [("Z2xZ2xZ2", (924, 168, 924, 0)), ("Z3xZ3", (2240, 48, 944, 1296)),
                                        ("Z9", (2438, 6, 14, 2424)), ("Z10", (18736, 4, 22, 18714))])
def test_stretch_surveys(lit, counts):
    assert survey(AbelianGroup.parse(lit), extended=True, workers=4).counts() == counts
