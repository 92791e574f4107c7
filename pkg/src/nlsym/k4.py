"""Bijective correlations on four points.

Each coordinate (l,k|i,j) with i < j, l != k is met by exactly two
permutations of [4], which differ by a transposition; this identifies the 72
coordinates with the edges of the transposition graph G4.  A correlation in
span B(4) is then M alpha for the incidence matrix M, and locality reduces to
the 144 inequalities alpha_pi + alpha_{pi o c} >= 0 over 4-cycles c.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .correlation import Correlation, validate
from .cyclotomic import Cyclotomic, Sign, exact_value, real_sign, to_float
from .errors import NotB4, NotMagicUnitary
from .locality import Certificate, LocalityVerdict, Status, verify_decomposition

PERMS = tuple(itertools.permutations(range(4)))
INDEX = {p: t for t, p in enumerate(PERMS)}


def compose(p, q):
    """p o q (apply q first)."""
    return tuple(p[q[x]] for x in range(4))


def parity(p) -> int:
    inv = sum(1 for i in range(4) for j in range(i + 1, 4) if p[i] > p[j])
    return inv % 2


def cycle_perm(cycle) -> tuple:
    out = list(range(4))
    for s, t in zip(cycle, cycle[1:] + cycle[:1]):
        out[s] = t
    return tuple(out)


def transposition(a, b) -> tuple:
    out = list(range(4))
    out[a], out[b] = b, a
    return tuple(out)


@dataclass(frozen=True)
class TranspositionGraphG4:
    vertices: tuple
    coordinates: tuple          # (l, k, i, j), one per edge, same order as edges
    edges: tuple                # pairs of vertex indices
    incidence: np.ndarray       # 72 x 24
    gamma: np.ndarray           # +1 on even, -1 on odd permutations

    def degree(self) -> np.ndarray:
        return self.incidence.sum(axis=0)

    def is_bipartite_by_parity(self) -> bool:
        return all(parity(self.vertices[u]) != parity(self.vertices[v]) for u, v in self.edges)

    def is_connected(self) -> bool:
        adj = {v: [] for v in range(24)}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == 24

    def rank(self) -> int:
        return exact_rank(self.incidence)

    def edge_of(self, coord) -> int:
        return self.coordinates.index(tuple(coord))


def exact_rank(M: np.ndarray) -> int:
    rows = [[Fraction(int(x)) for x in r] for r in M]
    rank = 0
    cols = len(rows[0]) if rows else 0
    for c in range(cols):
        p = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if p is None:
            continue
        rows[rank], rows[p] = rows[p], rows[rank]
        piv = rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / piv[c]
                rows[r] = [a - f * b for a, b in zip(rows[r], piv)]
        rank += 1
    return rank


@lru_cache(maxsize=1)
def transposition_graph() -> TranspositionGraphG4:
    coords, edges = [], []
    for i, j in itertools.combinations(range(4), 2):
        for l, k in itertools.permutations(range(4), 2):
            pair = [t for t, p in enumerate(PERMS) if p[i] == l and p[j] == k]
            if len(pair) != 2:
                raise AssertionError("each coordinate must be met by two permutations")
            coords.append((l, k, i, j))
            edges.append(tuple(pair))
    M = np.zeros((len(edges), 24), dtype=np.int64)
    for e, (u, v) in enumerate(edges):
        M[e, u] = M[e, v] = 1
    gamma = np.array([1 if parity(p) == 0 else -1 for p in PERMS], dtype=np.int64)
    return TranspositionGraphG4(PERMS, tuple(coords), tuple(edges), M, gamma)


def hat_map(p: Correlation) -> list:
    """p_hat(e) = p(l,k|i,j) for the coordinate identified with edge e."""
    if p.n != 4:
        raise NotB4("correlation is not on four points")
    return [p(*c) for c in transposition_graph().coordinates]


# ------------------------------------------------------------------ inequalities

@dataclass(frozen=True)
class K4Inequality:
    pi: tuple
    cycle: tuple                 # (a, b, c, d)
    terms: tuple                 # ((l, k, i, j), coefficient) triples

    @property
    def partner(self) -> tuple:
        return compose(self.pi, cycle_perm(self.cycle))

    def label(self) -> str:
        return f"pi={list(self.pi)} cycle=({' '.join(map(str, self.cycle))})"

    def evaluate(self, p: Correlation):
        acc = Fraction(0)
        for coord, c in self.terms:
            acc = acc + c * p(*coord)
        return exact_value(acc) if p.exact is not None else float(acc)

    def canonical_key(self) -> tuple:
        """Coefficients on i<j coordinates (using p(l,k|i,j) = p(k,l|j,i))."""
        acc: dict = {}
        for (l, k, i, j), c in self.terms:
            key = (l, k, i, j) if i < j else (k, l, j, i)
            acc[key] = acc.get(key, 0) + c
        return tuple(sorted((k, v) for k, v in acc.items() if v))


def four_cycles() -> list[tuple]:
    """The six 4-cycles of [4], written starting at 0."""
    return [(0,) + rest for rest in itertools.permutations((1, 2, 3))]


@lru_cache(maxsize=1)
def k4_inequalities() -> tuple:
    """All 24 x 6 = 144 inequalities, before deduplication."""
    out = []
    for pi in PERMS:
        for a, b, c, d in four_cycles():
            terms = (((pi[c], pi[d], c, d), 1), ((pi[b], pi[d], a, d), -1), ((pi[b], pi[c], a, b), 1))
            out.append(K4Inequality(pi, (a, b, c, d), terms))
    return tuple(out)


def distinct_inequalities() -> list[K4Inequality]:
    seen, out = set(), []
    for ineq in k4_inequalities():
        key = ineq.canonical_key()
        if key not in seen:
            seen.add(key)
            out.append(ineq)
    return out


# ---------------------------------------------------------------------- decide

def _check_b4(p: Correlation):
    if p.n != 4:
        raise NotB4("correlation is not on four points")
    problems = validate(p)
    if problems:
        raise NotB4(f"not in B(4): {problems[0]}")


def solve_incidence(p_hat: list) -> list:
    """alpha with M alpha = p_hat via a spanning tree rooted at the identity (alpha_id = 0)."""
    g = transposition_graph()
    adj = {v: [] for v in range(24)}
    for e, (u, v) in enumerate(g.edges):
        adj[u].append((v, e))
        adj[v].append((u, e))
    alpha: list = [None] * 24
    alpha[0] = Fraction(0)
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v, e in adj[u]:
            if alpha[v] is None:
                alpha[v] = exact_value(p_hat[e] - alpha[u]) if not isinstance(p_hat[e], float) \
                    else p_hat[e] - alpha[u]
                queue.append(v)
    return alpha


def _is_neg(x) -> bool:
    if isinstance(x, float):
        return x < -1e-12
    return real_sign(x) == Sign.NEGATIVE


def shift_nonnegative(alpha: list) -> list:
    """beta = alpha + c gamma with min over even beta equal to zero."""
    g = transposition_graph()
    evens = [alpha[t] for t in range(24) if g.gamma[t] == 1]
    lowest = evens[0]
    for x in evens[1:]:
        if _is_neg(x - lowest):
            lowest = x
    c = -lowest
    return [a + c * int(s) for a, s in zip(alpha, g.gamma)]


@lru_cache(maxsize=1)
def inequality_matrix() -> np.ndarray:
    """144 x 256 integer matrix of the inequalities on the flattened table p[l,k,i,j]."""
    W = np.zeros((len(k4_inequalities()), 256), dtype=np.int64)
    for r, ineq in enumerate(k4_inequalities()):
        for coord, c in ineq.terms:
            W[r, np.ravel_multi_index(coord, (4, 4, 4, 4))] += c
    return W


def _worst_inequality(p: Correlation):
    ineqs = k4_inequalities()
    if p.exact is not None and p.tensor[0] == 1:
        _, den, T = p.tensor
        if T.dtype != object:
            vals = inequality_matrix() @ T.reshape(256, -1)[:, 0]
            r = int(np.argmin(vals))
            return ineqs[r], Fraction(int(vals[r]), den)
    worst, worst_val = None, None
    for ineq in ineqs:
        v = ineq.evaluate(p)
        if worst is None or _is_neg(v - worst_val):
            worst, worst_val = ineq, v
    return worst, worst_val


def k4_decide(p: Correlation) -> LocalityVerdict:
    """Exact locality on four points from the 144 inequalities."""
    _check_b4(p)
    worst, worst_val = _worst_inequality(p)
    if _is_neg(worst_val):
        coeffs = {}
        for coord, c in worst.terms:
            coeffs[coord] = coeffs.get(coord, 0) + Fraction(c)
        cert = Certificate(p.labels, {k: v for k, v in coeffs.items() if v}, Fraction(0), worst_val)
        if p.exact is not None and not cert.verify(p):
            raise AssertionError("violated inequality failed to certify")
        return LocalityVerdict(Status.NONLOCAL, certificate=cert, gap=to_float(worst_val),
                               method=f"K4 inequality {worst.label()}", numeric_only=p.exact is None)
    alpha = solve_incidence(hat_map(p))
    beta = shift_nonnegative(alpha)
    decomp = {PERMS[t]: b for t, b in enumerate(beta) if b != 0}
    if p.exact is not None and not verify_decomposition(p, decomp):
        raise AssertionError("recovered decomposition does not reproduce p")
    return LocalityVerdict(Status.LOCAL, decomp, method="K4 inequalities, incidence solve + parity shift",
                           numeric_only=p.exact is None)


def slack_report(p: Correlation) -> list[tuple[K4Inequality, object]]:
    _check_b4(p)
    return [(ineq, ineq.evaluate(p)) for ineq in k4_inequalities()]


# ------------------------------------------------- magic unitaries (numerical)

def check_magic_unitary(U: np.ndarray, tol: float = 1e-10):
    U = np.asarray(U, dtype=complex)
    if U.ndim != 4 or U.shape[:2] != (4, 4) or U.shape[2] != U.shape[3]:
        raise NotMagicUnitary("expected a 4 x 4 array of square matrices")
    d = U.shape[2]
    eye = np.eye(d)
    for i in range(4):
        for j in range(4):
            u = U[i, j]
            if not (np.allclose(u, u.conj().T, atol=tol) and np.allclose(u @ u, u, atol=tol)):
                raise NotMagicUnitary(f"u[{i}][{j}] is not a projection")
    if not (np.allclose(U.sum(axis=0), eye, atol=tol) and np.allclose(U.sum(axis=1), eye, atol=tol)):
        raise NotMagicUnitary("rows/columns do not sum to the identity")
    return U


def magic_unitary_correlation(U: np.ndarray) -> np.ndarray:
    """p(l,k|i,j) = tr(u_il u_jk) / d, as a float table [l, k, i, j]."""
    d = U.shape[2]
    return np.einsum("ilxy,jkyx->lkij", U, U).real / d


def triple_trace(U: np.ndarray, pi, triple=(0, 1, 2)) -> complex:
    d = U.shape[2]
    a, b, c = triple
    return np.trace(U[a, pi[a]] @ U[b, pi[b]] @ U[c, pi[c]]) / d


def recover_decomposition_k4(U: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """alpha_pi = tau(u_{0 pi0} u_{1 pi1} u_{2 pi2}); parity-shifted to be nonnegative."""
    U = check_magic_unitary(U, tol)
    g = transposition_graph()
    alpha = np.array([triple_trace(U, pi).real for pi in PERMS])
    table = magic_unitary_correlation(U)
    p_hat = np.array([table[c] for c in g.coordinates])
    if not np.allclose(g.incidence @ alpha, p_hat, atol=1e-9):
        raise AssertionError("M alpha != p_hat")
    if alpha.min() < -tol:
        alpha = np.array(shift_nonnegative(list(alpha)))
    return alpha
