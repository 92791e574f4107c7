"""Finite abelian groups Z_n1 x ... x Z_nd, their characters and automorphisms.

Elements and characters are both enumerated lexicographically on residue
tuples, which fixes every matrix indexing in the package.  Character index c
has the same exponent tuple as element index c; this is the (non-canonical)
bijection between the group and its dual used when printing.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import cached_property, reduce

import numpy as np

from .cyclotomic import Cyclotomic
from .errors import BoundExceeded, ParseError

DEFAULT_AUT_BOUND = 64


@dataclass(frozen=True)
class AbelianGroup:
    factors: tuple[int, ...]

    def __post_init__(self):
        facs = tuple(int(n) for n in self.factors)
        if any(n < 1 for n in facs):
            raise ValueError("factors must be positive")
        facs = tuple(n for n in facs if n > 1)
        object.__setattr__(self, "factors", facs)

    @classmethod
    def parse(cls, literal: str) -> "AbelianGroup":
        """Parse "Z4", "Z2xZ2xZ2", "z2xz4" and similar."""
        text = literal.strip().lower().replace(" ", "")
        if not re.fullmatch(r"z\d+(xz\d+)*", text):
            raise ParseError(f"bad group literal {literal!r}")
        return cls(tuple(int(t) for t in text[1:].split("xz")))

    def __str__(self):
        return "x".join(f"Z{n}" for n in self.factors) or "Z1"

    @property
    def rank(self) -> int:
        return len(self.factors)

    @cached_property
    def order(self) -> int:
        return math.prod(self.factors)

    @cached_property
    def exponent(self) -> int:
        return reduce(lambda a, b: a * b // math.gcd(a, b), self.factors, 1)

    @cached_property
    def elements(self) -> tuple[tuple[int, ...], ...]:
        return tuple(itertools.product(*(range(n) for n in self.factors)))

    @cached_property
    def residues(self) -> np.ndarray:
        if not self.factors:
            return np.zeros((1, 0), dtype=np.int64)
        return np.array(self.elements, dtype=np.int64)

    @cached_property
    def _strides(self) -> np.ndarray:
        strides = [1] * self.rank
        for i in range(self.rank - 2, -1, -1):
            strides[i] = strides[i + 1] * self.factors[i + 1]
        return np.array(strides, dtype=np.int64)

    def index(self, residues) -> int:
        return int(sum((int(r) % n) * s for r, n, s in zip(residues, self.factors, self._strides)))

    def element(self, idx: int) -> "GroupElement":
        return GroupElement(self, self.elements[idx])

    @cached_property
    def add_table(self) -> np.ndarray:
        """add_table[a, b] = index of a + b."""
        if not self.rank:
            return np.zeros((1, 1), np.int64)
        r = self.residues
        s = (r[:, None, :] + r[None, :, :]) % np.array(self.factors)
        return s @ self._strides

    @cached_property
    def neg(self) -> np.ndarray:
        r = self.residues
        if not self.rank:
            return np.zeros(1, np.int64)
        return ((-r) % np.array(self.factors)) @ self._strides

    @cached_property
    def diff_table(self) -> np.ndarray:
        """diff_table[u, v] = index of u^-1 v (i.e. v - u)."""
        return self.add_table[self.neg]

    @cached_property
    def element_orders(self) -> np.ndarray:
        out = np.ones(self.order, dtype=np.int64)
        for i, n in enumerate(self.factors):
            r = self.residues[:, i]
            o = n // np.gcd(r, n)
            out = np.lcm(out, o)
        return out

    @cached_property
    def exponent_table(self) -> np.ndarray:
        """E[chi, a] with chi(a) = zeta_N ** E[chi, a], N the exponent."""
        if not self.rank:
            return np.zeros((1, 1), np.int64)
        w = np.array([self.exponent // n for n in self.factors], dtype=np.int64)
        r = self.residues
        return ((r * w) @ r.T) % self.exponent

    def character(self, idx: int) -> "Character":
        return Character(self, self.elements[idx])

    def generators(self) -> list[int]:
        """Indices of the standard basis elements e_1, ..., e_d."""
        out = []
        for i in range(self.rank):
            e = [0] * self.rank
            e[i] = 1
            out.append(self.index(e))
        return out


@dataclass(frozen=True)
class GroupElement:
    group: AbelianGroup = field(repr=False)
    residues: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "residues",
                           tuple(int(r) % n for r, n in zip(self.residues, self.group.factors)))

    @property
    def index(self) -> int:
        return self.group.index(self.residues)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.group, tuple(a + b for a, b in zip(self.residues, other.residues)))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.group, tuple(-a for a in self.residues))

    def is_identity(self) -> bool:
        return not any(self.residues)


@dataclass(frozen=True)
class Character:
    group: AbelianGroup = field(repr=False)
    exponents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents",
                           tuple(int(m) % n for m, n in zip(self.exponents, self.group.factors)))

    @property
    def index(self) -> int:
        return self.group.index(self.exponents)

    def power(self, a: GroupElement) -> int:
        """Exponent k with chi(a) = zeta_N ** k."""
        g = self.group
        return sum((g.exponent // n) * m * r
                   for n, m, r in zip(g.factors, self.exponents, a.residues)) % g.exponent

    def __call__(self, a: GroupElement) -> Cyclotomic:
        return Cyclotomic.root(self.group.exponent, self.power(a))

    def __mul__(self, other: "Character") -> "Character":
        return Character(self.group, tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def inverse(self) -> "Character":
        return Character(self.group, tuple(-a for a in self.exponents))


def character_table(G: AbelianGroup) -> list[list[Cyclotomic]]:
    """C[chi][a] = chi(a), rows in character order, columns in element order."""
    N = G.exponent
    E = G.exponent_table
    roots = [Cyclotomic.root(N, k) for k in range(N)]
    return [[roots[int(k)] for k in row] for row in E]


class _Perm:
    """Permutation of range(n) stored as an image tuple."""

    __slots__ = ("table",)

    def __init__(self, table):
        self.table = tuple(int(t) for t in table)

    def __call__(self, i: int) -> int:
        return self.table[i]

    def __len__(self):
        return len(self.table)

    def __eq__(self, other):
        return type(self) is type(other) and self.table == other.table

    def __hash__(self):
        return hash((type(self).__name__, self.table))

    def __repr__(self):
        return f"{type(self).__name__}({list(self.table)})"

    def compose(self, other):
        """self o other: apply other first."""
        return type(self)(self.table[j] for j in other.table)

    def inverse(self):
        inv = [0] * len(self.table)
        for i, j in enumerate(self.table):
            inv[j] = i
        return type(self)(inv)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.table))

    def array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.int64)


class DualPermutation(_Perm):
    """A permutation of the enumerated characters of a group."""

    @classmethod
    def identity(cls, n: int) -> "DualPermutation":
        return cls(range(n))

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "DualPermutation":
        try:
            table = [int(t) for t in text.replace(" ", "").split(",") if t != ""]
        except ValueError as exc:
            raise ParseError(f"bad permutation {text!r}") from exc
        if sorted(table) != list(range(len(table))) or (n is not None and len(table) != n):
            raise ParseError(f"{text!r} is not a permutation of 0..{(n or len(table)) - 1}")
        return cls(table)


class GroupAutomorphism(_Perm):
    """An automorphism stored as its action on element indices."""

    @classmethod
    def from_images(cls, G: AbelianGroup, images) -> "GroupAutomorphism":
        """Extend images of the standard generators additively."""
        imgs = [G.residues[i] for i in images]
        table = []
        for r in G.elements:
            acc = np.zeros(G.rank, dtype=np.int64)
            for c, im in zip(r, imgs):
                acc = acc + c * im
            table.append(G.index(acc))
        return cls(table)

    def images(self, G: AbelianGroup) -> list[int]:
        return [self.table[g] for g in G.generators()]


def is_automorphism(G: AbelianGroup, table) -> bool:
    t = np.asarray(table)
    if sorted(t.tolist()) != list(range(G.order)):
        return False
    A = G.add_table
    return bool(np.array_equal(t[A], A[t[:, None], t[None, :]]))


def automorphism_group(G: AbelianGroup, bound: int = DEFAULT_AUT_BOUND) -> list[GroupAutomorphism]:
    """All automorphisms, by backtracking over generator images of matching order."""
    if G.order > bound:
        raise BoundExceeded(f"|G| = {G.order} exceeds automorphism bound {bound}")
    if not G.rank:
        return [GroupAutomorphism([0])]
    orders = G.element_orders
    cands = [np.flatnonzero(orders == n).tolist() for n in G.factors]
    A = G.add_table
    out = []

    def span(gens, sizes):
        # subgroup elements as combinations sum c_i g_i, in lex order of coefficients
        elems = [0]
        for g, n in zip(gens, sizes):
            new = []
            for e in elems:
                x = e
                for _ in range(n):
                    new.append(x)
                    x = A[x, g]
            elems = new
        return elems

    def extend(chosen):
        k = len(chosen)
        if k == G.rank:
            out.append(GroupAutomorphism(span(chosen, G.factors)))
            return
        for c in cands[k]:
            trial = chosen + [c]
            elems = span(trial, G.factors[: k + 1])
            if len(set(elems)) == len(elems):
                extend(trial)

    extend([])
    return out


def dual_map(G: AbelianGroup, sigma: GroupAutomorphism) -> DualPermutation:
    """sigma_hat(chi) = chi o sigma, as a permutation of character indices.

    Composition is contravariant: dual_map(s) o dual_map(t) = dual_map(t o s).
    """
    E = G.exponent_table
    gens = G.generators()
    imgs = [sigma(g) for g in gens]
    table = []
    for c in range(G.order):
        # value of chi o sigma on e_i is zeta_N ** E[c, sigma(e_i)] = zeta_{n_i} ** m_i
        exps = [int(E[c, im]) // (G.exponent // n) for im, n in zip(imgs, G.factors)]
        table.append(G.index(exps))
    return DualPermutation(table)


def translation(G: AbelianGroup, z: int) -> DualPermutation:
    """pi_z(x) = z x on characters."""
    return DualPermutation(G.add_table[z])


def inversion(G: AbelianGroup) -> DualPermutation:
    """eta(x) = x^-1 on characters."""
    return DualPermutation(G.neg)


def affine_maps(G: AbelianGroup, auts=None) -> list[DualPermutation]:
    """All maps x -> z sigma_hat(x); ordered by automorphism then z."""
    auts = automorphism_group(G) if auts is None else auts
    out = []
    for s in auts:
        sh = dual_map(G, s).array()
        for z in range(G.order):
            out.append(DualPermutation(G.add_table[z][sh]))
    return out
