"""Graph automorphism games: disjoint-automorphism correlations, products and the classifier.

Correlations for a graph game are indexed by the vertices 0..n-1.  A correlation
wins the G-automorphism game when p(l,k|i,j) = 0 unless rel(i,j) = rel(l,k),
rel being equal / adjacent / distinct non-adjacent.
"""
from __future__ import annotations

import enum
import itertools
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

from .correlation import Correlation, validate
from .errors import BoundExceeded, NotAutomorphism, NotConnectedRegular, NotDisjoint
from .graphs import (Graph, automorphisms, cartesian, cospectral, distinct_eigenvalues,
                     find_isomorphism, from_edges, is_automorphism, is_isomorphic, named,
                     parse_graph, tensor)
from .groups import AbelianGroup, DualPermutation
from .locality import LocalityVerdict, Status, decide_local

CONFIRM_LIMIT = 100_000
SPECTRAL_TOL = 1e-8


class Product(str, enum.Enum):
    CARTESIAN = "cartesian"
    TENSOR = "tensor"


class Criterion(str, enum.Enum):
    CRITERION_MET = "CRITERION_MET"
    CRITERION_FAILED = "CRITERION_FAILED"


class Verdict(str, enum.Enum):
    NONLOCAL = "NONLOCAL"
    NO_NONLOCAL = "NO_NONLOCAL"
    UNDECIDED = "UNDECIDED"

    def __str__(self):
        return self.value


def product_graph(g: Graph, h: Graph, product: Product) -> Graph:
    return cartesian(g, h) if Product(product) == Product.CARTESIAN else tensor(g, h)


# -------------------------------------------------------------- game validity

def winning_violations(p: Correlation, g: Graph, tol: float = 1e-12) -> list[tuple]:
    """Coordinates (l,k,i,j) with rel(i,j) != rel(l,k) carrying nonzero mass."""
    n = g.n
    if p.n != n:
        raise ValueError("correlation and graph sizes differ")
    rel = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        for j in range(n):
            rel[i, j] = g.rel(i, j)
    mismatch = rel[:, :, None, None] != rel[None, None, :, :]
    if p.exact is not None:
        nz = np.vectorize(lambda x: x != 0, otypes=[bool])(p.exact)
    else:
        nz = np.abs(p.approx) > tol
    return [tuple(int(t) for t in idx) for idx in np.argwhere(mismatch & nz)]


def is_winning(p: Correlation, g: Graph) -> bool:
    return not validate(p) and not winning_violations(p, g)


# ------------------------------------------------------ disjoint automorphisms

def support(perm) -> int:
    """Bitmask of the points moved by perm."""
    mask = 0
    for v, w in enumerate(perm):
        if v != w:
            mask |= 1 << v
    return mask


def are_disjoint(perms) -> bool:
    masks = [support(s) for s in perms]
    return all(m for m in masks) and all(
        not (a & b) for a, b in itertools.combinations(masks, 2))


def find_disjoint_automorphisms(g: Graph, k: int, auts=None) -> tuple | None:
    """k nontrivial automorphisms with pairwise disjoint supports, or None.

    The search runs over distinct supports (one lexicographically smallest
    automorphism per support), smallest supports first, and is exhaustive.
    """
    if k < 1:
        raise ValueError("k must be positive")
    auts = automorphisms(g) if auts is None else auts
    by_mask: dict = {}
    for s in auts:
        m = support(s)
        if m and (m not in by_mask or tuple(s) < by_mask[m]):
            by_mask[m] = tuple(s)
    masks = sorted(by_mask, key=lambda m: (bin(m).count("1"), m))

    def search(start, used, chosen):
        if len(chosen) == k:
            return chosen
        for t in range(start, len(masks)):
            m = masks[t]
            if not (m & used):
                res = search(t + 1, used | m, chosen + [m])
                if res:
                    return res
        return None

    found = search(0, 0, [])
    return None if found is None else tuple(by_mask[m] for m in found)


# ------------------------------------------- magic unitary from three disjoint

class Entry(enum.Enum):
    ZERO = "0"
    ONE = "1"
    Q = "q"
    ONE_MINUS_Q = "1-q"


def _pair_trace(x: tuple, y: tuple) -> Fraction:
    """Normalized trace of a product of two symbolic entries on C^2."""
    (a, s), (b, t) = x, y
    if a == Entry.ZERO or b == Entry.ZERO:
        return Fraction(0)
    if a == Entry.ONE and b == Entry.ONE:
        return Fraction(1)
    if a == Entry.ONE or b == Entry.ONE:
        return Fraction(1, 2)
    same = s == t
    if a == b:                                 # q q or (1-q)(1-q)
        return Fraction(1, 2) if same else Fraction(1, 8)
    return Fraction(0) if same else Fraction(3, 8)


def projections() -> np.ndarray:
    """The three rank-one projections on C^2 onto directions 120 degrees apart."""
    out = []
    for t in range(3):
        v = np.array([np.cos(2 * np.pi * t / 3), np.sin(2 * np.pi * t / 3)])
        out.append(np.outer(v, v))
    return np.array(out)


@dataclass(frozen=True)
class DisjointAutoCorrelation:
    graph: Graph
    sigmas: tuple
    entries: tuple                 # entries[i][j] = (Entry, k or None)

    @property
    def n(self) -> int:
        return self.graph.n

    def table(self) -> np.ndarray:
        n = self.n
        E = self.entries
        out = np.empty((n, n, n, n), dtype=object)
        for l, k, i, j in itertools.product(range(n), repeat=4):
            out[l, k, i, j] = _pair_trace(E[i][l], E[j][k])
        return out

    @property
    def correlation(self) -> Correlation:
        return Correlation.from_exact(tuple(range(self.n)), self.table(), "disjoint-autos")

    def matrices(self) -> np.ndarray:
        """The magic unitary u[i, j] as 2 x 2 matrices."""
        q = projections()
        eye = np.eye(2)
        U = np.zeros((self.n, self.n, 2, 2))
        for i in range(self.n):
            for j in range(self.n):
                kind, t = self.entries[i][j]
                if kind == Entry.ONE:
                    U[i, j] = eye
                elif kind == Entry.Q:
                    U[i, j] = q[t]
                elif kind == Entry.ONE_MINUS_Q:
                    U[i, j] = eye - q[t]
        return U


def build_disjoint_auto(g: Graph, s1, s2, s3) -> DisjointAutoCorrelation:
    sigmas = tuple(tuple(int(x) for x in s) for s in (s1, s2, s3))
    for s in sigmas:
        if not is_automorphism(g, s):
            raise NotAutomorphism(f"{s} is not an automorphism of {g.name or 'the graph'}")
    if not are_disjoint(sigmas):
        raise NotDisjoint("automorphisms must be nontrivial with pairwise disjoint supports")
    n = g.n
    entries = []
    for i in range(n):
        row = []
        for j in range(n):
            e = (Entry.ONE, None) if i == j else (Entry.ZERO, None)
            for t, s in enumerate(sigmas):
                if s[j] != j:
                    e = (Entry.Q, t) if s[j] == i else ((Entry.ONE_MINUS_Q, t) if i == j else (Entry.ZERO, None))
                    break
            row.append(e)
        entries.append(tuple(row))
    return DisjointAutoCorrelation(g, sigmas, tuple(entries))


def disjoint_auto_correlation(g: Graph, s1, s2, s3) -> Correlation:
    return build_disjoint_auto(g, s1, s2, s3).correlation


# --------------------------------------------------------- spectral criteria

def _spectrum(g: Graph) -> list:
    if not g.is_connected() or not g.is_regular():
        raise NotConnectedRegular(f"{g.name or 'graph'} is not connected and regular")
    return distinct_eigenvalues(g, SPECTRAL_TOL)


def _close(x, y) -> bool:
    return abs(x - y) <= SPECTRAL_TOL


def _cluster(values) -> list:
    out = []
    for v in sorted(values):
        if not out or not _close(v, out[-1]):
            out.append(v)
    return out


def spectral_product_check(g: Graph, h: Graph, product: Product) -> Criterion:
    """Eigenvalue condition under which absence of symmetry passes to the product.

    CARTESIAN: the difference sets {l_i - l_j} and {m_k - m_l} meet only in 0.
    TENSOR: neither spectrum contains 0 and the ratio sets meet only in 1.
    """
    lam, mu = _spectrum(g), _spectrum(h)
    if Product(product) == Product.CARTESIAN:
        A = _cluster(a - b for a in lam for b in lam)
        B = _cluster(a - b for a in mu for b in mu)
        trivial = 0
    else:
        if any(_close(x, 0) for x in lam + mu):
            return Criterion.CRITERION_FAILED
        A = _cluster(Fraction(a, b) if isinstance(a, int) and isinstance(b, int) else a / b
                     for a in lam for b in lam)
        B = _cluster(Fraction(a, b) if isinstance(a, int) and isinstance(b, int) else a / b
                     for a in mu for b in mu)
        trivial = 1
    common = [a for a in A if any(_close(a, b) for b in B)]
    ok = all(_close(c, trivial) for c in common)
    return Criterion.CRITERION_MET if ok else Criterion.CRITERION_FAILED


def lift_correlation_to_product(p: Correlation, g: Graph, h: Graph, product: Product = Product.CARTESIAN
                                ) -> Correlation:
    """p'(jb,ld|ia,kc) = [a=b][c=d] p(j,l|i,k); vertex (i,a) has index i*|H| + a.

    The lift does not depend on which product is taken; the argument records
    the game it is meant for.
    """
    Product(product)
    n, m = g.n, h.n
    if p.n != n:
        raise ValueError("correlation is not indexed by the vertices of G")
    N = n * m
    eye = np.eye(m, dtype=np.int64)
    # axes: j b l d i a k c
    if p.exact is not None:
        base = p.exact
        out = np.empty((n, m, n, m, n, m, n, m), dtype=object)
        out[...] = 0
        for j, l, i, k in itertools.product(range(n), repeat=4):
            v = base[j, l, i, k]
            if v != 0:
                for a in range(m):
                    for c in range(m):
                        out[j, a, l, c, i, a, k, c] = v
        return Correlation.from_exact(tuple(range(N)), out.reshape(N, N, N, N), "lifted")
    A = np.einsum("jlik,ba,dc->jbldiakc", p.approx, eye, eye)
    return Correlation.from_float(tuple(range(N)), A.reshape(N, N, N, N), "lifted")


def relabel_correlation(p: Correlation, phi) -> Correlation:
    """q(l,k|i,j) = p(phi l, phi k | phi i, phi j)."""
    idx = np.asarray(phi)
    sel = np.ix_(idx, idx, idx, idx)
    if p.exact is not None:
        return Correlation.from_exact(tuple(range(len(idx))), p.exact[sel], p.provenance)
    return Correlation.from_float(tuple(range(len(idx))), p.approx[sel], p.provenance)


# -------------------------------------------------------------- attestations

@dataclass(frozen=True)
class Attestation:
    name: str
    graph: Graph
    source: str


def load_attestations(path=None) -> tuple[Attestation, ...]:
    """Graphs the literature certifies to have no quantum symmetry."""
    if path is None:
        text = resources.files("nlsym").joinpath("data/attestations.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    data = json.loads(text)
    out = []
    for e in data["graphs"]:
        text = e["graph"]
        try:
            g = named(text)
        except Exception:
            g = parse_graph(text, e["name"])
        out.append(Attestation(e["name"], g, e["source"]))
    return tuple(out)


@lru_cache(maxsize=1)
def default_attestations() -> tuple[Attestation, ...]:
    return load_attestations()


def attested(g: Graph, table=None) -> Attestation | None:
    table = default_attestations() if table is None else table
    for a in table:
        if a.graph.n == g.n and is_isomorphic(a.graph, g):
            return a
    return None


# ------------------------------------------------------------- recognition

@lru_cache(maxsize=1)
def regular_catalog(max_n: int = 6) -> tuple[Graph, ...]:
    """Connected regular graphs on 2..max_n vertices, up to isomorphism."""
    out = []
    for n in range(2, max_n + 1):
        pairs = list(itertools.combinations(range(n), 2))
        inc = np.zeros((len(pairs), n), dtype=np.int64)
        for e, (u, v) in enumerate(pairs):
            inc[e, u] = inc[e, v] = 1
        codes = np.arange(1, 1 << len(pairs), dtype=np.int64)
        bits = (codes[:, None] >> np.arange(len(pairs))) & 1
        deg = bits @ inc
        regular = codes[np.all(deg == deg[:, :1], axis=1)]
        found: list[Graph] = []
        for code in regular.tolist():
            g = from_edges(n, [pairs[e] for e in range(len(pairs)) if code >> e & 1])
            if g.is_connected() and not any(is_isomorphic(g, f) for f in found):
                found.append(g)
        out.extend(_name_small(g) for g in found)
    return tuple(out)


def _name_small(g: Graph) -> Graph:
    n, d = g.n, int(g.degrees[0])
    if d == n - 1:
        name = f"K{n}"
    elif d == 2:
        name = f"C{n}"
    else:
        name = f"R{n}.{d}." + g.to_graph6()
    return Graph(g.adjacency, name)


def product_factorizations(g: Graph) -> list[tuple[Graph, Graph, Product, tuple]]:
    """(A, B, product, phi) with g ~ A o B via phi, A and B connected regular."""
    n = g.n
    if n < 4 or not g.is_regular():
        return []
    deg = int(g.degrees[0]) if n else 0
    out = []
    cat = regular_catalog()
    for A in cat:
        if n % A.n:
            continue
        for B in cat:
            if A.n * B.n != n:
                continue
            da, db = int(A.degrees[0]), int(B.degrees[0])
            for prod, d in ((Product.CARTESIAN, da + db), (Product.TENSOR, da * db)):
                if d != deg:
                    continue
                P = product_graph(A, B, prod)
                phi = find_isomorphism(g, P)
                if phi is not None:
                    out.append((A, B, prod, phi))
    return out


# ------------------------------------------------------------- classifier

@dataclass
class Classification:
    graph: Graph
    verdict: Verdict
    rule: str
    attested: bool = False                       # rests on an attestation
    attestations: list = field(default_factory=list)
    witness: dict = field(default_factory=dict)
    confirmed: bool | None = None                # LP confirmation of a NONLOCAL verdict
    verdict_detail: LocalityVerdict | None = None
    correlation: Correlation | None = None

    def line(self) -> str:
        mark = " †" if self.attested else ""
        extra = ""
        if self.verdict == Verdict.NONLOCAL:
            extra = {True: " [LP confirmed]", False: " (unconfirmed LP)", None: ""}[self.confirmed]
        return f"{self.graph.name or 'graph'}: {self.verdict}{mark} by {self.rule}{extra}"

    def to_json(self) -> dict:
        out = {"graph": self.graph.name, "n": self.graph.n, "graph6": self.graph.to_graph6(),
               "verdict": self.verdict.value, "rule": self.rule, "attested": self.attested,
               "attestations": list(self.attestations), "witness": self.witness,
               "confirmed": self.confirmed}
        v = self.verdict_detail
        if v is not None and v.certificate is not None and hasattr(v.certificate, "to_json"):
            out["certificate"] = v.certificate.to_json()
        return out


def k5_witness() -> Correlation:
    """The Z5 character-table square with characters 3 and 4 exchanged, on five labels."""
    from .qls import qls_correlation

    return qls_correlation(AbelianGroup((5,)), DualPermutation([0, 1, 2, 4, 3]))


def _confirm(p: Correlation, g: Graph, auts, limit: int) -> tuple[bool | None, LocalityVerdict | None]:
    if len(auts) > limit:
        return False, None
    v = decide_local(p, auts)
    if v.status != Status.NONLOCAL:
        raise AssertionError(f"witness for {g.name} is not NONLOCAL against Aut: {v.summary()}")
    return True, v


def classify(g: Graph, *, attestations=None, confirm_limit: int = CONFIRM_LIMIT,
             confirm: bool = True) -> Classification:
    """NONLOCAL / NO_NONLOCAL / UNDECIDED for nonlocal symmetry of g."""
    if g.n > 12:
        raise BoundExceeded("classify handles graphs with at most 12 vertices")
    table = default_attestations() if attestations is None else attestations
    n = g.n
    # (a) small graphs
    if n <= 4:
        return Classification(g, Verdict.NO_NONLOCAL, "four-point rule: every quantum permutation "
                              "correlation on at most four points is local")
    co = g.complement()
    # (b) K5 and its complement
    if n == 5 and (g.num_edges in (0, 10)):
        p = k5_witness()
        auts = automorphisms(g)
        conf, v = _confirm(p, g, auts, confirm_limit) if confirm else (None, None)
        return Classification(g, Verdict.NONLOCAL, "K5 witness (character-table square over Z5)",
                              witness={"source": "Z5 square, characters 3 and 4 exchanged"},
                              confirmed=conf, verdict_detail=v, correlation=p)
    # (c) three disjoint automorphisms
    auts = automorphisms(g)
    triple = find_disjoint_automorphisms(g, 3, auts)
    if triple is not None:
        p = disjoint_auto_correlation(g, *triple)
        conf, v = _confirm(p, g, auts, confirm_limit) if confirm else (None, None)
        return Classification(g, Verdict.NONLOCAL, "three disjoint automorphisms",
                              witness={"automorphisms": [list(s) for s in triple]},
                              confirmed=conf, verdict_detail=v, correlation=p)
    # (d) structural rules, on g and on its complement
    for h, which in ((g, ""), (co, "complement: ")):
        res = _structural(g, h, which, table, auts, confirm_limit, confirm)
        if res is not None:
            return res
    return Classification(g, Verdict.UNDECIDED, "no applicable rule")


def _structural(g, h, which, table, auts, confirm_limit, confirm) -> Classification | None:
    comps = h.components()
    if len(comps) == 2:
        A, B = h.induced(comps[0]), h.induced(comps[1])
        if is_isomorphic(A, B):
            att = attested(A, table)
            if att is not None:
                return Classification(g, Verdict.NO_NONLOCAL,
                                      which + f"two copies of a connected graph without quantum symmetry ({att.name})",
                                      attested=True, attestations=[att.source])
        elif not cospectral(A, B, SPECTRAL_TOL):
            # quantum isomorphic graphs are cospectral
            a1, a2 = attested(A, table), attested(B, table)
            if a1 is not None and a2 is not None:
                return Classification(g, Verdict.NO_NONLOCAL,
                                      which + f"union of non-quantum-isomorphic graphs without quantum "
                                      f"symmetry ({a1.name}, {a2.name})",
                                      attested=True, attestations=[a1.source, a2.source])
    if len(comps) != 1:
        return None
    for A, B, prod, phi in product_factorizations(h):
        for X, Y, swap in ((A, B, False), (B, A, True)):
            sub = classify(X, attestations=table, confirm=False)
            if sub.verdict == Verdict.NONLOCAL and sub.correlation is not None:
                p = lift_correlation_to_product(sub.correlation, X, Y, prod)
                if swap:
                    p = relabel_correlation(p, _swap_index(X.n, Y.n))
                p = relabel_correlation(p, phi)
                if winning_violations(p, g):
                    raise AssertionError("lifted correlation does not win the game")
                conf, v = _confirm(p, g, auts, confirm_limit) if confirm else (None, None)
                return Classification(g, Verdict.NONLOCAL,
                                      which + f"{prod.value} product {A.name} o {B.name} with a "
                                      f"factor {X.name} that has nonlocal symmetry (lifted witness)",
                                      witness={"factor": X.name, "factor_rule": sub.rule},
                                      confirmed=conf, verdict_detail=v, correlation=p)
        for X, Y in ((A, B), (B, A)):
            att = attested(Y, table)
            if att is None:
                continue
            if spectral_product_check(X, Y, prod) != Criterion.CRITERION_MET:
                continue
            sub = classify(X, attestations=table, confirm=False)
            if sub.verdict == Verdict.NO_NONLOCAL:
                return Classification(g, Verdict.NO_NONLOCAL,
                                      which + f"{prod.value}-product spectral rule: {X.name} o {Y.name}, "
                                      f"{X.name} without nonlocal symmetry ({sub.rule}), "
                                      f"{Y.name} without quantum symmetry",
                                      attested=True, attestations=sub.attestations + [att.source])
    return None


def _swap_index(na: int, nb: int) -> list[int]:
    """phi with (b, a) in B o A read as (a, b) in A o B: phi[b*na + a] = a*nb + b."""
    return [a * nb + b for b in range(nb) for a in range(na)]


# ------------------------------------------------ vertex-transitive corpus

VT_CORPUS = (
    ("(1)", "2K3", Verdict.NO_NONLOCAL),
    ("(2)", "3K2", Verdict.NONLOCAL),
    ("(3)", "Q3", Verdict.NO_NONLOCAL),
    ("(4)", "2K4", Verdict.NONLOCAL),
    ("(5)", "2C4", Verdict.NONLOCAL),
    ("(6)", "4K2", Verdict.NONLOCAL),
    ("(7)", "3K3", Verdict.NONLOCAL),
    ("(8)", "K5xK2", Verdict.NONLOCAL),
    ("(9)", "C10(4)", Verdict.NONLOCAL),
    ("(10)", "2C5", Verdict.NO_NONLOCAL),
    ("(11)", "2K5", Verdict.NONLOCAL),
    ("(12)", "5K2", Verdict.NONLOCAL),
)


@dataclass
class CorpusRow:
    label: str
    name: str
    expected: Verdict
    result: Classification
    seconds: float

    @property
    def matches(self) -> bool:
        return self.result.verdict == self.expected

    def line(self) -> str:
        got = "yes" if self.result.verdict == Verdict.NONLOCAL else (
            "no" if self.result.verdict == Verdict.NO_NONLOCAL else "?")
        want = "yes" if self.expected == Verdict.NONLOCAL else "no"
        mark = "†" if self.result.attested else " "
        ok = "ok" if self.matches else "MISMATCH"
        return (f"{self.label:5s} {self.name:8s} expected {want:3s} got {got:3s}{mark} {ok:8s} "
                f"{self.result.rule}"
                + {True: " [LP confirmed]", False: " (unconfirmed LP)", None: ""}[self.result.confirmed])


def run_corpus(confirm_limit: int = CONFIRM_LIMIT) -> list[CorpusRow]:
    rows = []
    for label, name, expected in VT_CORPUS:
        t = time.perf_counter()
        res = classify(named(name), confirm_limit=confirm_limit)
        rows.append(CorpusRow(label, name, expected, res, time.perf_counter() - t))
    return rows
