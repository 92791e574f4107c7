import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlsym.correlation import validate
from nlsym.errors import NotAutomorphism, NotConnectedRegular, NotDisjoint
from nlsym.games import (Criterion, Entry, Product, Verdict, are_disjoint, attested, build_disjoint_auto,
                         classify, find_disjoint_automorphisms, is_winning, k5_witness, lift_correlation_to_product,
                         load_attestations, product_factorizations, projections, regular_catalog,
                         relabel_correlation, run_corpus, spectral_product_check, winning_violations)
from nlsym.graphs import automorphisms, complete, cycle, empty, is_isomorphic, named
from nlsym.locality import Status, decide_local

DISJOINT = ["3K2", "2C4", "2K4", "3K3", "5K2", "C10(4)"]


def test_projection_geometry():
    q = projections()
    for a, b in itertools.product(range(3), repeat=2):
        t = np.trace(q[a] @ q[b]) / 2
        assert abs(t - (0.5 if a == b else 0.125)) < 1e-12
    assert np.allclose(q.sum(axis=0), 1.5 * np.eye(2))


def test_find_disjoint_automorphisms():
    assert find_disjoint_automorphisms(complete(4), 3) is None
    assert find_disjoint_automorphisms(complete(4), 2) == ((1, 0, 2, 3), (0, 1, 3, 2))
    assert find_disjoint_automorphisms(named("3K2"), 3) == ((1, 0, 2, 3, 4, 5), (0, 1, 3, 2, 4, 5),
                                                            (0, 1, 2, 3, 5, 4))
    assert find_disjoint_automorphisms(cycle(5), 3) is None


@pytest.mark.parametrize("name", DISJOINT)
def test_construction_is_winning_and_nonlocal(name):
    g = named(name)
    sig = find_disjoint_automorphisms(g, 3)
    assert sig is not None and are_disjoint(sig)
    c = build_disjoint_auto(g, *sig)
    p = c.correlation
    assert validate(p) == []
    assert winning_violations(p, g) == [] and is_winning(p, g)
    # exact pairing values against the numerical magic unitary
    U = c.matrices()
    n = g.n
    assert np.allclose(U.sum(axis=0), np.eye(2)) and np.allclose(U.sum(axis=1), np.eye(2))
    num = np.einsum("ilxy,jkyx->lkij", U, U) / 2
    assert np.allclose(num, c.table().astype(float), atol=1e-12)
    moved = [[j for j in range(n) if s[j] != j] for s in sig]
    for a, b in itertools.combinations(range(3), 2):
        j, k = moved[a][0], moved[b][0]
        assert c.entries[sig[a][j]][j] == (Entry.Q, a)
        assert p(sig[a][j], sig[b][k], j, k) == Fraction(1, 8)
    v = decide_local(p, automorphisms(g))
    assert v.status == Status.NONLOCAL
    assert v.certificate.verify(p, automorphisms(g))


def test_construction_errors():
    g = named("3K2")
    ident = tuple(range(6))
    with pytest.raises(NotAutomorphism):
        build_disjoint_auto(g, (1, 2, 0, 3, 4, 5), (0, 1, 3, 2, 4, 5), (0, 1, 2, 3, 5, 4))
    with pytest.raises(NotDisjoint):
        build_disjoint_auto(g, (1, 0, 2, 3, 4, 5), (1, 0, 2, 3, 4, 5), (0, 1, 2, 3, 5, 4))
    with pytest.raises(NotDisjoint):
        build_disjoint_auto(g, ident, (0, 1, 3, 2, 4, 5), (0, 1, 2, 3, 5, 4))


def test_losing_correlation_detected():
    p = k5_witness()
    assert is_winning(p, complete(5)) and is_winning(p, empty(5))
    assert winning_violations(p, cycle(5))


@pytest.mark.parametrize("g,h,prod,expected", [
    ("K4", "K2", Product.TENSOR, Criterion.CRITERION_MET),
    ("K2", "K2", Product.CARTESIAN, Criterion.CRITERION_FAILED),
    ("K5", "K2", Product.CARTESIAN, Criterion.CRITERION_MET),
    ("C5", "K3", Product.CARTESIAN, Criterion.CRITERION_MET),
    ("C4", "K2", Product.TENSOR, Criterion.CRITERION_FAILED),
])
def test_spectral_criterion(g, h, prod, expected):
    assert spectral_product_check(named(g), named(h), prod) == expected


def test_spectral_criterion_needs_connected_regular():
    with pytest.raises(NotConnectedRegular):
        spectral_product_check(named("2K2"), named("K2"), Product.CARTESIAN)


def test_lifted_witness_wins_product_game():
    g, h = complete(5), complete(2)
    p = lift_correlation_to_product(k5_witness(), g, h)
    P = named("K5xK2")
    assert validate(p) == []
    assert is_winning(p, P)


def test_relabel_correlation_matches_isomorphism():
    g = named("3K2")
    sig = find_disjoint_automorphisms(g, 3)
    p = build_disjoint_auto(g, *sig).correlation
    phi = (5, 4, 3, 2, 1, 0)
    h = g.relabel(np.argsort(phi))
    q = relabel_correlation(p, phi)
    assert validate(q) == []
    assert is_winning(q, h) == is_winning(p, g)


def test_regular_catalog():
    cat = regular_catalog()
    assert len(cat) == 11
    assert all(g.is_connected() and g.is_regular() for g in cat)
    assert not any(is_isomorphic(a, b) for a, b in itertools.combinations(cat, 2))


def test_product_factorizations():
    names = {(a.name, b.name, prod) for a, b, prod, _ in product_factorizations(named("Q3"))}
    assert ("K4", "K2", Product.TENSOR) in names and ("C4", "K2", Product.CARTESIAN) in names
    assert product_factorizations(named("C5")) == []


def test_attestations():
    table = load_attestations()
    assert {a.name for a in table} >= {"K2", "K3", "C5", "petersen"}
    assert attested(named("petersen")) is not None
    assert attested(cycle(5)) is not None
    assert attested(named("C6")) is None
    assert all(a.source for a in table)


@pytest.mark.parametrize("name,verdict", [
    ("K3", Verdict.NO_NONLOCAL), ("C4", Verdict.NO_NONLOCAL), ("K5", Verdict.NONLOCAL),
    ("E5", Verdict.NONLOCAL), ("3K2", Verdict.NONLOCAL), ("2K3", Verdict.NO_NONLOCAL),
    ("C5", Verdict.UNDECIDED), ("petersen", Verdict.UNDECIDED),
])
def test_classify_examples(name, verdict):
    assert classify(named(name)).verdict == verdict


@pytest.mark.parametrize("name", ["3K2", "2K3", "K5xK2", "2C5", "Q3", "C6"])
def test_complement_invariance(name):
    g = named(name)
    assert classify(g, confirm=False).verdict == classify(g.complement(), confirm=False).verdict


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["3K2", "2K3", "Q3", "2C4", "C6"]), st.data())
def test_relabel_invariance(name, data):
    g = named(name)
    perm = data.draw(st.permutations(range(g.n)))
    assert classify(g.relabel(perm), confirm=False).verdict == classify(g, confirm=False).verdict


def test_nonlocal_classification_carries_certificate():
    c = classify(named("2K4"))
    assert c.verdict == Verdict.NONLOCAL and c.confirmed
    auts = automorphisms(named("2K4"))
    assert c.verdict_detail.certificate.verify(c.correlation, auts)
    assert c.to_json()["certificate"]


def test_vertex_transitive_corpus():
    rows = run_corpus()
    assert len(rows) == 12 and all(r.matches for r in rows)
    flagged = {r.name for r in rows if r.result.attested}
    assert flagged == {"2K3", "Q3", "2C5"}
