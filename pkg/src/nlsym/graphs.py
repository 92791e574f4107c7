"""Simple graphs: constructors, parsers, automorphisms and isomorphisms.

Automorphism and isomorphism search is plain backtracking over vertices in a
fixed order, with candidates filtered by degree and by adjacency to the
vertices already placed.  That is ample for the graph sizes handled here
(n <= 12).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import BoundExceeded, ParseError

DEFAULT_AUT_CAP = 200_000


@dataclass(frozen=True, eq=False)
class Graph:
    adjacency: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        A = np.asarray(self.adjacency, dtype=np.int8)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("adjacency must be square")
        if np.any(np.diag(A)) or not np.array_equal(A, A.T) or np.any((A != 0) & (A != 1)):
            raise ValueError("graph must be simple")
        A = A.copy()
        A.setflags(write=False)
        object.__setattr__(self, "adjacency", A)

    def __repr__(self):
        return f"Graph({self.name or 'unnamed'}, n={self.n}, m={self.num_edges})"

    def __eq__(self, other):
        return isinstance(other, Graph) and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash(self.adjacency.tobytes())

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    @cached_property
    def neighbors(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(np.flatnonzero(row).tolist()) for row in self.adjacency)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n) if self.adjacency[i, j]]

    def rel(self, i: int, j: int) -> int:
        """0 equal, 1 adjacent, 2 distinct non-adjacent."""
        if i == j:
            return 0
        return 1 if self.adjacency[i, j] else 2

    def is_regular(self) -> bool:
        return self.n == 0 or bool(np.all(self.degrees == self.degrees[0]))

    def components(self) -> list[list[int]]:
        seen, out = set(), []
        for s in range(self.n):
            if s in seen:
                continue
            comp, stack = [], [s]
            seen.add(s)
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in self.neighbors[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            out.append(sorted(comp))
        return out

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def induced(self, vertices) -> "Graph":
        idx = list(vertices)
        return Graph(self.adjacency[np.ix_(idx, idx)])

    def complement(self) -> "Graph":
        A = 1 - self.adjacency - np.eye(self.n, dtype=np.int8)
        return Graph(A, f"co-{self.name}" if self.name else "")

    def relabel(self, perm) -> "Graph":
        """Graph with vertex v renamed perm[v]."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        return Graph(self.adjacency[np.ix_(inv, inv)], self.name)

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.adjacency.astype(float))

    def to_graph6(self) -> str:
        return to_graph6(self)


# ---------------------------------------------------------------- constructors

def from_edges(n: int, edges, name: str = "") -> Graph:
    A = np.zeros((n, n), dtype=np.int8)
    for u, v in edges:
        if u == v:
            raise ValueError("loops are not allowed")
        A[u, v] = A[v, u] = 1
    return Graph(A, name)


def complete(n: int) -> Graph:
    return Graph(np.ones((n, n), dtype=np.int8) - np.eye(n, dtype=np.int8), f"K{n}")


def empty(n: int) -> Graph:
    return Graph(np.zeros((n, n), dtype=np.int8), f"E{n}")


def cycle(n: int) -> Graph:
    return circulant(n, [1], f"C{n}")


def circulant(n: int, connections, name: str = "") -> Graph:
    A = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        for c in connections:
            A[i, (i + c) % n] = A[(i + c) % n, i] = 1
    return Graph(A, name or f"C{n}({','.join(map(str, connections))})")


def hypercube(d: int) -> Graph:
    n = 1 << d
    return from_edges(n, [(u, u ^ (1 << b)) for u in range(n) for b in range(d) if u < u ^ (1 << b)], f"Q{d}")


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return from_edges(10, outer + spokes + inner, "petersen")


def disjoint_union(*graphs: Graph, name: str = "") -> Graph:
    n = sum(g.n for g in graphs)
    A = np.zeros((n, n), dtype=np.int8)
    s = 0
    for g in graphs:
        A[s:s + g.n, s:s + g.n] = g.adjacency
        s += g.n
    return Graph(A, name)


def copies(m: int, g: Graph) -> Graph:
    return disjoint_union(*([g] * m), name=f"{m}{g.name}")


def cartesian(g: Graph, h: Graph) -> Graph:
    """Vertex (i, a) is i * h.n + a."""
    A = np.kron(g.adjacency, np.eye(h.n, dtype=np.int8)) + np.kron(np.eye(g.n, dtype=np.int8), h.adjacency)
    return Graph(A, f"{g.name}□{h.name}")


def tensor(g: Graph, h: Graph) -> Graph:
    return Graph(np.kron(g.adjacency, h.adjacency), f"{g.name}×{h.name}")


def lexicographic(g: Graph, h: Graph) -> Graph:
    A = np.kron(g.adjacency, np.ones((h.n, h.n), dtype=np.int8)) + np.kron(np.eye(g.n, dtype=np.int8), h.adjacency)
    return Graph(A, f"{g.name}[{h.name}]")


_NAMED_SPECIAL = {"petersen": petersen}


def named(text: str) -> Graph:
    """Built-in names: Kn, Cn, En, Qd, mG, GxH (cartesian), G*H (tensor), Cn(a,b,...), petersen."""
    t = text.strip()
    low = t.lower()
    if low in _NAMED_SPECIAL:
        return _NAMED_SPECIAL[low]()
    if "x" in low and not low.startswith("x"):
        parts = re.split(r"[xX]", t)
        if len(parts) == 2 and all(parts):
            g = cartesian(named(parts[0]), named(parts[1]))
            return Graph(g.adjacency, t)
    if "*" in t:
        a, b = t.split("*", 1)
        g = tensor(named(a), named(b))
        return Graph(g.adjacency, t)
    m = re.fullmatch(r"(\d+)([A-Za-z].*)", t)
    if m:
        g = copies(int(m.group(1)), named(m.group(2)))
        return Graph(g.adjacency, t)
    m = re.fullmatch(r"[Cc](\d+)\(([\d,\s]+)\)", t)
    if m:
        n = int(m.group(1))
        conns = [int(c) for c in m.group(2).split(",") if c.strip()]
        return circulant(n, [1] + conns, t)
    m = re.fullmatch(r"([KCEQ])(\d+)", t, flags=re.IGNORECASE)
    if m:
        kind, n = m.group(1).upper(), int(m.group(2))
        g = {"K": complete, "C": cycle, "E": empty, "Q": hypercube}[kind](n)
        return Graph(g.adjacency, t)
    raise ParseError(f"unknown graph name {text!r}")


# --------------------------------------------------------------------- parsers

def parse_edge_list(text: str, name: str = "") -> Graph:
    """'n m' header followed by m lines 'u v' (0-indexed)."""
    lines = [ln.split("#")[0].strip() for ln in text.strip().splitlines()]
    lines = [ln for ln in lines if ln]
    try:
        n, m = (int(t) for t in lines[0].split())
        edges = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
    except (ValueError, IndexError) as exc:
        raise ParseError(f"bad edge list: {exc}") from exc
    if len(edges) != m or any(len(e) != 2 for e in edges):
        raise ParseError(f"edge list header says {m} edges, found {len(edges)}")
    if any(not (0 <= u < n and 0 <= v < n) for u, v in edges):
        raise ParseError("edge endpoint out of range")
    try:
        return from_edges(n, edges, name)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def parse_graph6(text: str, name: str = "") -> Graph:
    s = text.strip()
    if s.startswith(">>graph6<<"):
        s = s[10:]
    data = [ord(c) - 63 for c in s]
    if not data or any(d < 0 or d > 63 for d in data):
        raise ParseError("bad graph6 string")
    if data[0] < 63:
        n, rest = data[0], data[1:]
    elif len(data) >= 4 and data[1] < 63:
        n = (data[1] << 12) | (data[2] << 6) | data[3]
        rest = data[4:]
    else:
        raise ParseError("graph6 graphs this large are not supported")
    bits = [(d >> (5 - b)) & 1 for d in rest for b in range(6)]
    need = n * (n - 1) // 2
    if len(bits) < need:
        raise ParseError("graph6 string too short")
    A = np.zeros((n, n), dtype=np.int8)
    t = 0
    for j in range(1, n):
        for i in range(j):
            if bits[t]:
                A[i, j] = A[j, i] = 1
            t += 1
    return Graph(A, name)


def to_graph6(g: Graph) -> str:
    n = g.n
    if n > 62:
        raise ValueError("only n <= 62 supported")
    bits = [int(g.adjacency[i, j]) for j in range(1, n) for i in range(j)]
    bits += [0] * (-len(bits) % 6)
    chars = [chr(n + 63)]
    for k in range(0, len(bits), 6):
        v = 0
        for b in bits[k:k + 6]:
            v = (v << 1) | b
        chars.append(chr(v + 63))
    return "".join(chars)


def parse_graph(text: str, name: str = "") -> Graph:
    """Edge list if the text has a numeric header, graph6 otherwise."""
    first = text.strip().split("\n", 1)[0].strip()
    if re.fullmatch(r"\d+\s+\d+", first):
        return parse_edge_list(text, name)
    return parse_graph6(first, name)


# ------------------------------------------------------- automorphisms / isos

def _mappings(g: Graph, h: Graph, cap: int | None, first_only: bool):
    """Backtracking over adjacency-preserving bijections V(g) -> V(h)."""
    n = g.n
    if n != h.n or g.num_edges != h.num_edges or sorted(g.degrees) != sorted(h.degrees):
        return []
    A, B = g.adjacency, h.adjacency
    # visit vertices so each new one is adjacent to placed ones when possible
    order, placed = [], set()
    for comp in g.components():
        start = comp[0]
        queue = [start]
        placed.add(start)
        while queue:
            u = queue.pop(0)
            order.append(u)
            for v in sorted(g.neighbors[u]):
                if v not in placed:
                    placed.add(v)
                    queue.append(v)
    hdeg = h.degrees
    out = []
    image = [-1] * n
    used = [False] * n

    def extend(t):
        if t == n:
            out.append(tuple(image))
            if cap is not None and len(out) > cap:
                raise BoundExceeded(f"more than {cap} automorphisms")
            return first_only
        u = order[t]
        du = g.degrees[u]
        for v in range(n):
            if used[v] or hdeg[v] != du:
                continue
            ok = True
            for s in order[:t]:
                if A[u, s] != B[v, image[s]]:
                    ok = False
                    break
            if not ok:
                continue
            image[u] = v
            used[v] = True
            if extend(t + 1):
                return True
            used[v] = False
            image[u] = -1
        return False

    extend(0)
    return out


def automorphisms(g: Graph, cap: int = DEFAULT_AUT_CAP) -> list[tuple[int, ...]]:
    """All automorphisms as image tuples; BoundExceeded beyond cap elements."""
    n = g.n
    if g.num_edges in (0, n * (n - 1) // 2):
        import math

        if math.factorial(n) > cap:
            raise BoundExceeded(f"|Aut| = {n}! exceeds {cap}")
        return [tuple(p) for p in itertools.permutations(range(n))]
    return sorted(_mappings(g, g, cap, False))


def find_isomorphism(g: Graph, h: Graph) -> tuple[int, ...] | None:
    res = _mappings(g, h, None, True)
    return res[0] if res else None


def is_isomorphic(g: Graph, h: Graph) -> bool:
    return find_isomorphism(g, h) is not None


def is_automorphism(g: Graph, perm) -> bool:
    p = np.asarray(perm)
    if sorted(p.tolist()) != list(range(g.n)):
        return False
    A = g.adjacency
    return bool(np.array_equal(A[np.ix_(p, p)], A))


def is_group(perms) -> bool:
    """Closure under composition and inverses."""
    S = set(map(tuple, perms))
    for p in S:
        inv = [0] * len(p)
        for i, j in enumerate(p):
            inv[j] = i
        if tuple(inv) not in S:
            return False
        for q in S:
            if tuple(p[q[i]] for i in range(len(p))) not in S:
                return False
    return True


# ----------------------------------------------------------------- spectra

def char_poly(g: Graph) -> list[int]:
    """Integer characteristic polynomial coefficients, leading first (Faddeev-LeVerrier)."""
    n = g.n
    A = [[Fraction(int(x)) for x in row] for row in g.adjacency]
    coeffs = [Fraction(1)]
    M = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I ; c_k = -tr(A M_k) / k
        M = [[sum(A[i][t] * M[t][j] for t in range(n)) + (coeffs[-1] if i == j else 0)
              for j in range(n)] for i in range(n)]
        AM_tr = sum(sum(A[i][t] * M[t][i] for t in range(n)) for i in range(n))
        coeffs.append(-AM_tr / k)
    return [int(c) for c in coeffs]


def _poly_at(coeffs, x: int) -> int:
    v = 0
    for c in coeffs:
        v = v * x + c
    return v


def distinct_eigenvalues(g: Graph, tol: float = 1e-8) -> list:
    """Clustered spectrum; integer eigenvalues are confirmed exactly and returned as int."""
    ev = np.sort(g.spectrum())
    clusters: list[list[float]] = []
    for x in ev:
        if clusters and abs(x - clusters[-1][-1]) <= tol:
            clusters[-1].append(x)
        else:
            clusters.append([x])
    poly = None
    out = []
    for c in clusters:
        v = float(np.mean(c))
        r = round(v)
        if abs(v - r) <= tol:
            poly = poly or char_poly(g)
            if _poly_at(poly, r) == 0:
                out.append(int(r))
                continue
        out.append(v)
    return out


def cospectral(g: Graph, h: Graph, tol: float = 1e-8) -> bool:
    return g.n == h.n and bool(np.allclose(np.sort(g.spectrum()), np.sort(h.spectrum()), atol=tol))
