import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlsym.correlation import Correlation, deterministic, validate
from nlsym.errors import NotB4, NotMagicUnitary
from nlsym.groups import AbelianGroup
from nlsym.k4 import (PERMS, check_magic_unitary, distinct_inequalities, hat_map, k4_decide, k4_inequalities,
                      magic_unitary_correlation, recover_decomposition_k4, slack_report, solve_incidence,
                      transposition_graph)
from nlsym.locality import Status, decide_local, verify_decomposition
from nlsym.qls import qls_correlation

VERTS = np.array([deterministic(p).approx for p in PERMS]).astype(np.int64)


def combo(w):
    T = np.tensordot(np.asarray(w, dtype=np.int64), VERTS, 1)
    return Correlation.from_tensor(range(4), 1, int(sum(w)), T[..., None], "combo")


def test_transposition_graph_structure():
    g = transposition_graph()
    assert len(g.edges) == 72 and len(set(g.coordinates)) == 72
    assert g.incidence.shape == (72, 24)
    assert g.rank() == 23
    assert not np.any(g.incidence @ g.gamma)
    assert g.is_bipartite_by_parity() and g.is_connected()
    assert np.all(g.degree() == 6)


def test_inequality_counts():
    assert len(k4_inequalities()) == 144
    assert len(distinct_inequalities()) == 144


def test_vertices_satisfy_all_inequalities():
    for p in PERMS:
        d = deterministic(p)
        assert all(v >= 0 for _, v in slack_report(d))


def test_hat_map_round_trip():
    w = list(range(1, 25))
    p = combo(w)
    alpha = solve_incidence(hat_map(p))
    g = transposition_graph()
    assert [sum((int(g.incidence[e, t]) * alpha[t] for t in range(24)), Fraction(0)) for e in range(72)] \
        == hat_map(p)


@pytest.mark.parametrize("lit", ["Z4", "Z2xZ2"])
def test_group_correlations_have_nonnegative_slack(lit):
    G = AbelianGroup.parse(lit)
    for pi in itertools.permutations(range(4)):
        p = qls_correlation(G, list(pi))
        assert all(v >= 0 for _, v in slack_report(p))
        v = k4_decide(p)
        assert v.status == Status.LOCAL
        assert verify_decomposition(p, v.decomposition)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=24, max_size=24).filter(lambda w: sum(w) > 0))
def test_mixtures_agree_with_lp(w):
    p = combo(w)
    a, b = k4_decide(p), decide_local(p)
    assert a.status == b.status == Status.LOCAL
    assert verify_decomposition(p, a.decomposition)
    assert all(x >= 0 for x in a.decomposition.values())


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(-1, 3), min_size=24, max_size=24))
def test_signed_combinations_agree_with_lp(w):
    if sum(w) <= 0:
        return
    T = np.tensordot(np.asarray(w, dtype=np.int64), VERTS, 1)
    if T.min() < 0:
        return
    p = combo(w)
    if validate(p):
        return
    a, b = k4_decide(p), decide_local(p)
    assert a.status == b.status
    if a.status == Status.NONLOCAL:
        assert a.certificate.verify(p)


def test_known_nonlocal_b4_point():
    w = [1, -1, 0, 2, 1, 3, 3, 1, 2, 3, 3, 3, 2, 2, 3, 1, 0, 3, 1, 0, 1, 0, 3, 2]
    p = combo(w)
    assert not validate(p)
    v = k4_decide(p)
    assert v.status == Status.NONLOCAL and v.certificate.verify(p)
    assert decide_local(p).status == Status.NONLOCAL


def test_rejects_non_b4():
    with pytest.raises(NotB4):
        k4_decide(deterministic([0, 1, 2]))


def _projection(theta, phi):
    v = np.array([np.cos(theta), np.exp(1j * phi) * np.sin(theta)])
    return np.outer(v, v.conj())


def _block_magic_unitary(p, q):
    one = np.eye(2)
    z = np.zeros((2, 2))
    rows = [[p, one - p, z, z], [one - p, p, z, z], [z, z, q, one - q], [z, z, one - q, q]]
    return np.array(rows)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, np.pi), st.floats(0, 2 * np.pi), st.floats(0, np.pi), st.floats(0, 2 * np.pi),
       st.permutations(range(4)))
def test_recover_decomposition_from_magic_unitary(t1, f1, t2, f2, sigma):
    U = _block_magic_unitary(_projection(t1, f1), _projection(t2, f2))
    U = U[list(sigma)]                   # permuting rows keeps it magic
    check_magic_unitary(U)
    alpha = recover_decomposition_k4(U)
    assert alpha.min() >= -1e-10
    assert abs(alpha.sum() - 1) < 1e-9
    table = magic_unitary_correlation(U)
    mix = np.tensordot(alpha, VERTS.astype(float), 1)
    assert np.allclose(mix, table, atol=1e-9)


def test_bad_magic_unitary_rejected():
    U = _block_magic_unitary(_projection(0.3, 0), _projection(0.4, 0))
    U[0, 0] = U[0, 0] * 0.5
    with pytest.raises(NotMagicUnitary):
        check_magic_unitary(U)
