"""Bijective correlations p(l,k|i,j), their composition and characteristic matrices.

Storage is a dense table indexed [l, k, i, j] (outputs l, k; inputs i, j).
Exact entries are Fractions or Cyclotomics; every correlation also carries a
float shadow.  Exact checks run on an integer coefficient tensor: all entries
are written over one cyclotomic order N and one common denominator, so the
linear conditions become integer array comparisons.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .cyclotomic import Cyclotomic, Sign, exact_value, real_sign, reduction_table, totient
from .errors import IndexMismatch, NotDoublyStochastic, NotInvariant, ParseError
from .groups import AbelianGroup

FLOAT_TOL = 1e-9

ZERO = Fraction(0)
ONE = Fraction(1)


# ------------------------------------------------------------ coefficient tensors

def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def to_tensor(values: np.ndarray):
    """Write an object array of exact scalars as (order, den, integer tensor).

    The tensor has one extra trailing axis of length phi(order); entry
    x = sum_m T[..., m] z^m / den.
    """
    flat = [exact_value(v) for v in values.ravel()]
    order, den = 1, 1
    for v in flat:
        if isinstance(v, Cyclotomic):
            order = _lcm(order, v.order)
            den = _lcm(den, v.den)
        else:
            den = _lcm(den, v.denominator)
    d = totient(order)
    rows = []
    for v in flat:
        if isinstance(v, Cyclotomic):
            w = v.lift(order)
            f = den // w.den
            rows.append([c * f for c in w.num])
        else:
            rows.append([v.numerator * (den // v.denominator)] + [0] * (d - 1))
    big = max((abs(c) for r in rows for c in r), default=0)
    dtype = np.int64 if big < 2 ** 40 else object
    T = np.array(rows, dtype=dtype).reshape(values.shape + (d,))
    return order, den, T


def from_tensor(order: int, den: int, T: np.ndarray) -> np.ndarray:
    """Inverse of to_tensor; equal coefficient rows share one scalar object."""
    shape = T.shape[:-1]
    d = T.shape[-1]
    flat = T.reshape(-1, d)
    out = np.empty(len(flat), dtype=object)
    cache: dict = {}
    for idx, row in enumerate(flat):
        key = tuple(int(c) for c in row)
        v = cache.get(key)
        if v is None:
            if not any(key[1:]):
                v = Fraction(key[0], den)
            else:
                v = Cyclotomic(order, key, den, _reduced=True)
                if v.is_rational():
                    v = v.to_fraction()
            cache[key] = v
        out[idx] = v
    return out.reshape(shape)


def poly_matmul(A: np.ndarray, B: np.ndarray, order: int) -> np.ndarray:
    """Matrix product of cyclotomic coefficient matrices (trailing axis = basis)."""
    d = A.shape[-1]
    R = reduction_table(order)
    dtype = object if (A.dtype == object or B.dtype == object) else np.int64
    full = np.zeros((A.shape[0], B.shape[1], order), dtype=dtype)
    for s in range(d):
        for t in range(d):
            full[..., (s + t) % order] += A[..., s] @ B[..., t]
    if dtype == object:
        return np.tensordot(full, R.astype(object), axes=([-1], [0]))
    return full @ R


# ------------------------------------------------------------------ violations

@dataclass(frozen=True)
class Violation:
    condition: str
    indices: tuple
    detail: str = ""

    def __str__(self):
        return f"{self.condition} at {self.indices}{': ' + self.detail if self.detail else ''}"


# ----------------------------------------------------------------- correlation

@dataclass(frozen=True, eq=False)
class Correlation:
    labels: tuple
    exact: np.ndarray | None = field(repr=False)
    approx: np.ndarray = field(repr=False)
    provenance: str = "user-supplied"

    @classmethod
    def from_exact(cls, labels: Sequence, table, provenance: str = "user-supplied") -> "Correlation":
        table = np.asarray(table, dtype=object)
        n = len(labels)
        if table.shape != (n, n, n, n):
            raise ValueError(f"table shape {table.shape} does not match {n} labels")
        ex = np.empty(table.shape, dtype=object)
        flat = ex.ravel()
        for idx, v in enumerate(table.ravel()):
            flat[idx] = exact_value(v)
        approx = np.array([complex(v).real if isinstance(v, Cyclotomic) else float(v) for v in flat],
                          dtype=float).reshape(table.shape)
        return cls(tuple(labels), ex, approx, provenance)

    @classmethod
    def from_tensor(cls, labels, order, den, T, provenance) -> "Correlation":
        ex = from_tensor(order, den, T)
        roots = np.cos(2 * np.pi * np.arange(T.shape[-1]) / order)
        approx = (T.astype(float) @ roots) / den
        out = cls(tuple(labels), ex, approx, provenance)
        if order == 1 and T.dtype != object:
            # already canonical once the common factor is removed
            g = math.gcd(int(den), *(int(x) for x in np.unique(T)))
            out.__dict__["tensor"] = (1, int(den) // g, T // g)
        return out

    @classmethod
    def from_float(cls, labels: Sequence, table, provenance: str = "user-supplied") -> "Correlation":
        arr = np.asarray(table, dtype=float)
        n = len(labels)
        if arr.shape != (n, n, n, n):
            raise ValueError(f"table shape {arr.shape} does not match {n} labels")
        return cls(tuple(labels), None, arr, provenance)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def numeric_only(self) -> bool:
        return self.exact is None

    def __call__(self, l, k, i, j):
        if self.exact is None:
            return float(self.approx[l, k, i, j])
        return self.exact[l, k, i, j]

    @cached_property
    def tensor(self):
        """(order, den, integer coefficient tensor) of the exact table."""
        if self.exact is None:
            raise ValueError("numeric-only correlation has no exact tensor")
        return to_tensor(self.exact)

    def is_rational(self) -> bool:
        return self.exact is not None and self.tensor[0] == 1

    def same_as(self, other: "Correlation") -> bool:
        if self.n != other.n:
            return False
        if self.exact is None or other.exact is None:
            return bool(np.allclose(self.approx, other.approx, atol=FLOAT_TOL))
        a = self.tensor
        b = other.tensor
        if a[0] != b[0] or a[1] != b[1]:
            return all(x == y for x, y in zip(self.exact.ravel(), other.exact.ravel()))
        return bool(np.array_equal(a[2], b[2]))

    def to_json(self) -> dict:
        entries = []
        n = self.n
        for l in range(n):
            for k in range(n):
                for i in range(n):
                    for j in range(n):
                        if self.exact is None:
                            v = float(self.approx[l, k, i, j])
                            if v == 0.0:
                                continue
                            val = v
                        else:
                            x = self.exact[l, k, i, j]
                            if x == 0:
                                continue
                            val = x.to_json() if isinstance(x, Cyclotomic) else str(x)
                        entries.append({"l": self.labels[l], "k": self.labels[k],
                                        "i": self.labels[i], "j": self.labels[j], "value": val})
        return {"labels": list(self.labels), "provenance": self.provenance, "entries": entries}

    @classmethod
    def from_json(cls, data: dict) -> "Correlation":
        try:
            labels = tuple(data["labels"])
            pos = {lab: t for t, lab in enumerate(labels)}
            n = len(labels)
            entries = data.get("entries", [])
            numeric = any(isinstance(e["value"], float) for e in entries)
            if numeric:
                arr = np.zeros((n, n, n, n))
            else:
                arr = np.full((n, n, n, n), ZERO, dtype=object)
            for e in entries:
                idx = (pos[e["l"]], pos[e["k"]], pos[e["i"]], pos[e["j"]])
                v = e["value"]
                if isinstance(v, dict):
                    v = Cyclotomic.from_json(v)
                    v = float(v) if numeric else exact_value(v)
                elif isinstance(v, str):
                    v = Fraction(v)
                    v = float(v) if numeric else v
                elif isinstance(v, int):
                    v = float(v) if numeric else Fraction(v)
                arr[idx] = v
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad correlation JSON: {exc}") from exc
        prov = data.get("provenance", "user-supplied")
        if numeric:
            return cls.from_float(labels, arr, prov)
        return cls.from_exact(labels, arr, prov)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


# -------------------------------------------------------------------- validate

def _first(mask: np.ndarray) -> tuple:
    return tuple(int(t) for t in np.argwhere(mask)[0])


def _nonzero_rows(T: np.ndarray) -> np.ndarray:
    return np.any(T != 0, axis=-1)


def validate(p: Correlation) -> list[Violation]:
    """Violated bijective-correlation conditions; empty iff p is valid."""
    n = p.n
    out: list[Violation] = []
    if p.exact is None:
        X = p.approx[..., None]
        close = lambda a, b: np.all(np.abs(a - b) <= FLOAT_TOL, axis=-1)  # noqa: E731
        one = np.ones(1)
    else:
        order, den, X = p.tensor
        close = lambda a, b: np.all(a == b, axis=-1)  # noqa: E731
        one = np.zeros(X.shape[-1], dtype=X.dtype)
        one[0] = den
    eye = np.eye(n, dtype=bool)
    mism = eye[None, None, :, :] != eye[:, :, None, None]  # delta_ij != delta_lk at [l,k,i,j]
    zero = close(X, np.zeros_like(X))
    bad = mism & ~zero
    if bad.any():
        out.append(Violation("bisynchronous", _first(bad), "nonzero where delta_ij != delta_lk"))
    swapped = X.transpose(1, 0, 3, 2, 4)
    bad = ~close(X, swapped)
    if bad.any():
        out.append(Violation("symmetry", _first(bad), "p(l,k|i,j) != p(k,l|j,i)"))
    # marginals, indexed [a, b, free]
    m1 = X.sum(axis=1).transpose(0, 1, 2, 3)            # sum_k p(a,k|b,j) -> [a,b,j]
    m2 = X.sum(axis=3).transpose(0, 2, 1, 3)            # sum_j p(a,k|b,j) -> [a,b,k]
    m3 = X.sum(axis=0).transpose(0, 2, 1, 3)            # sum_l p(l,a|i,b) -> [a,b,i]
    m4 = X.sum(axis=2).transpose(1, 2, 0, 3)            # sum_i p(l,a|i,b) -> [a,b,l]
    ref = m1[:, :, :1]
    for name, m in (("marginal-out", m1), ("marginal-in", m2), ("marginal-out'", m3), ("marginal-in'", m4)):
        bad = ~close(m, np.broadcast_to(ref, m.shape))
        if bad.any():
            out.append(Violation("marginal", _first(bad), f"{name} sum differs from p(a|b)"))
            break
    marg = ref[:, :, 0]
    for axis, what in ((0, "column"), (1, "row")):
        s = marg.sum(axis=axis)
        bad = ~close(s, np.broadcast_to(one, s.shape))
        if bad.any():
            out.append(Violation("marginal", _first(bad), f"marginal matrix {what} sum != 1"))
            break
    norm = X.sum(axis=(0, 1))
    bad = ~close(norm, np.broadcast_to(one, norm.shape))
    if bad.any():
        out.append(Violation("normalization", _first(bad), "sum_{l,k} p(l,k|i,j) != 1"))
    out.extend(_range_violations(p))
    return out


def _range_violations(p: Correlation) -> list[Violation]:
    if p.exact is None:
        a = p.approx
        bad = (a < -FLOAT_TOL) | (a > 1 + FLOAT_TOL)
        return [Violation("range", _first(bad), "entry outside [0,1]")] if bad.any() else []
    order, den, T = p.tensor
    if order == 1 and T.dtype != object:
        bad = (T[..., 0] < 0) | (T[..., 0] > den)
        return [Violation("range", _first(bad), "entry outside [0,1]")] if bad.any() else []
    seen: dict = {}
    for idx, v in np.ndenumerate(p.exact):
        key = (v.order, v.num, v.den) if isinstance(v, Cyclotomic) else v
        if key in seen:
            continue
        seen[key] = idx
        if isinstance(v, Cyclotomic) and not v.is_real():
            return [Violation("range", idx, "entry is not real")]
        if real_sign(v) == Sign.NEGATIVE or real_sign(1 - v) == Sign.NEGATIVE:
            return [Violation("range", idx, "entry outside [0,1]")]
    return []


def is_valid(p: Correlation) -> bool:
    return not validate(p)


def _assert_valid(p: Correlation) -> Correlation:
    problems = validate(p)
    if problems:
        raise AssertionError(f"constructed correlation invalid: {problems[0]}")
    return p


# ---------------------------------------------------------------- constructors

def deterministic(pi, labels: Sequence | None = None) -> Correlation:
    """p_pi(l,k|i,j) = 1 iff l = pi(i) and k = pi(j)."""
    table = list(pi.table) if hasattr(pi, "table") else [int(t) for t in pi]
    n = len(table)
    if sorted(table) != list(range(n)):
        raise ValueError("not a permutation")
    labels = tuple(range(n)) if labels is None else tuple(labels)
    ex = np.full((n, n, n, n), ZERO, dtype=object)
    ap = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            ex[table[i], table[j], i, j] = ONE
            ap[table[i], table[j], i, j] = 1.0
    return Correlation(labels, ex, ap, "deterministic")


def _same_index(p: Correlation, q: Correlation):
    if p.n != q.n or p.labels != q.labels:
        raise IndexMismatch(f"index sets differ: {p.labels} vs {q.labels}")


def compose(p: Correlation, q: Correlation) -> Correlation:
    """(p o q)(l,k|i,j) = sum_{s,t} p(l,k|s,t) q(s,t|i,j)."""
    _same_index(p, q)
    n = p.n
    if p.exact is None or q.exact is None:
        a = p.approx.reshape(n * n, n * n) @ q.approx.reshape(n * n, n * n)
        return Correlation.from_float(p.labels, a.reshape(n, n, n, n), "composed")
    op, dp, Tp = p.tensor
    oq, dq, Tq = q.tensor
    order = _lcm(op, oq)
    if op != order:
        Tp = _lift_tensor(op, Tp, order)
    if oq != order:
        Tq = _lift_tensor(oq, Tq, order)
    d = Tp.shape[-1]
    A = Tp.reshape(n * n, n * n, d)
    B = Tq.reshape(n * n, n * n, d)
    C = poly_matmul(A, B, order).reshape(n, n, n, n, d)
    return Correlation.from_tensor(p.labels, order, dp * dq, C, "composed")


def _lift_tensor(order: int, T: np.ndarray, target: int) -> np.ndarray:
    """Coefficients over Q(zeta_order) rewritten over Q(zeta_target), same denominator."""
    d = T.shape[-1]
    M = np.zeros((d, totient(target)), dtype=np.int64)
    R = reduction_table(target)
    step = target // order
    for m in range(d):
        M[m] = R[(m * step) % target]
    return T @ (M.astype(object) if T.dtype == object else M)


def swap_io(p: Correlation) -> Correlation:
    """p'(l,k|i,j) = p(i,j|l,k)."""
    ex = None if p.exact is None else p.exact.transpose(2, 3, 0, 1).copy()
    return Correlation(p.labels, ex, p.approx.transpose(2, 3, 0, 1).copy(), p.provenance)


def uniform_group_correlation(G: AbelianGroup) -> Correlation:
    """p_G(w,x|y,z) = 1/|G| iff w^-1 x = y^-1 z."""
    n = G.order
    diff = G.diff_table
    match = diff[:, :, None, None] == diff[None, None, :, :]
    ex = np.where(match, Fraction(1, n), ZERO).astype(object)
    return Correlation(tuple(range(n)), ex, match / n, "group-uniform")


# ------------------------------------------------------------------- invariance

def is_group_invariant(p: Correlation, G: AbelianGroup) -> bool:
    """p(w,x|y,z) depends only on w^-1 x and y^-1 z."""
    if p.n != G.order:
        raise IndexMismatch("index set is not the group")
    diff = G.diff_table
    if p.exact is None:
        rep = p.approx[0][:, 0][diff[:, :, None, None], diff[None, None, :, :]]
        return bool(np.allclose(rep, p.approx, atol=FLOAT_TOL))
    X = p.tensor[2]
    rep = X[0][:, 0][diff[:, :, None, None], diff[None, None, :, :]]
    return bool(np.array_equal(rep, X))


@dataclass(frozen=True, eq=False)
class CharacteristicMatrix:
    """D[a][b] = |G| p(w,x|y,z) for w^-1 x = a (outputs) and y^-1 z = b (inputs)."""

    group: AbelianGroup
    entries: np.ndarray = field(repr=False)

    @classmethod
    def from_tensor(cls, G, order, den, T) -> "CharacteristicMatrix":
        return cls(G, from_tensor(order, den, T))

    @cached_property
    def tensor(self):
        return to_tensor(self.entries)

    @cached_property
    def approx(self) -> np.ndarray:
        order, den, T = self.tensor
        roots = np.cos(2 * np.pi * np.arange(T.shape[-1]) / order)
        return (T.astype(float) @ roots) / den

    @property
    def n(self) -> int:
        return self.group.order

    def __getitem__(self, ab):
        return self.entries[ab]

    def __eq__(self, other):
        if not isinstance(other, CharacteristicMatrix) or other.n != self.n:
            return NotImplemented
        return all(x == y for x, y in zip(self.entries.ravel(), other.entries.ravel()))

    def __hash__(self):
        return hash(tuple(hash(x) for x in self.entries.ravel()))

    def __matmul__(self, other: "CharacteristicMatrix") -> "CharacteristicMatrix":
        oa, da, A = self.tensor
        ob, db, B = other.tensor
        order = _lcm(oa, ob)
        if oa != order:
            A = _lift_tensor(oa, A, order)
        if ob != order:
            B = _lift_tensor(ob, B, order)
        return CharacteristicMatrix.from_tensor(self.group, order, da * db, poly_matmul(A, B, order))

    def is_permutation(self) -> bool:
        order, den, T = self.tensor
        if T[..., 1:].any():
            return False
        v = T[..., 0]
        return bool(np.all((v == 0) | (v == den)) and np.all((v == den).sum(axis=0) == 1)
                    and np.all((v == den).sum(axis=1) == 1))

    def is_doubly_stochastic(self) -> bool:
        order, den, T = self.tensor
        one = np.zeros(T.shape[-1], dtype=T.dtype)
        one[0] = den
        if not (np.all(T.sum(axis=0) == one) and np.all(T.sum(axis=1) == one)):
            return False
        seen = set()
        for v in self.entries.ravel():
            if v in seen:
                continue
            seen.add(v)
            if isinstance(v, Cyclotomic) and not v.is_real():
                return False
            if real_sign(v) == Sign.NEGATIVE:
                return False
        return True

    def key(self) -> bytes:
        """Canonical byte serialization for exact deduplication."""
        order, den, T = self.tensor
        return f"{order}/{den}/".encode() + np.ascontiguousarray(T, dtype=np.int64).tobytes()

    def to_json(self) -> dict:
        return {"group": str(self.group),
                "entries": [[x.to_json() if isinstance(x, Cyclotomic) else str(x) for x in row]
                            for row in self.entries]}

    @classmethod
    def from_json(cls, data: dict) -> "CharacteristicMatrix":
        G = AbelianGroup.parse(data["group"])
        rows = [[exact_value(Cyclotomic.from_json(x)) if isinstance(x, dict) else Fraction(x) for x in row]
                for row in data["entries"]]
        return cls(G, np.array(rows, dtype=object))


def identity_matrix(G: AbelianGroup) -> CharacteristicMatrix:
    n = G.order
    ent = np.full((n, n), ZERO, dtype=object)
    for a in range(n):
        ent[a, a] = ONE
    return CharacteristicMatrix(G, ent)


def to_characteristic(p: Correlation, G: AbelianGroup) -> CharacteristicMatrix:
    if p.exact is None:
        raise NotInvariant("characteristic matrices need exact correlations")
    if not is_group_invariant(p, G):
        raise NotInvariant("correlation is not group invariant")
    n = G.order
    ent = np.empty((n, n), dtype=object)
    for a in range(n):
        for b in range(n):
            ent[a, b] = exact_value(n * p.exact[0, a, 0, b])
    return CharacteristicMatrix(G, ent)


def from_characteristic(D: CharacteristicMatrix, provenance: str = "group-invariant") -> Correlation:
    G = D.group
    if not D.is_doubly_stochastic():
        raise NotDoublyStochastic("matrix is not doubly stochastic and nonnegative")
    n = G.order
    diff = G.diff_table
    order, den, T = D.tensor
    P = T[diff[:, :, None, None], diff[None, None, :, :]]
    return Correlation.from_tensor(tuple(range(n)), order, den * n, P, provenance)
