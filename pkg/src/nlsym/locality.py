"""Locality decisions: is a correlation a convex mixture of deterministic ones?

Two encodings of the same question:

* correlation space: one column per admissible permutation, one row per
  coordinate (l,k|i,j) with i < j, l != k (these determine any element of
  span B(n)), plus normalization;
* characteristic-matrix space for group-invariant correlations: columns are
  the distinct matrices D_pi of averaged deterministic correlations.

NONLOCAL verdicts always carry an exact certificate h.x >= offset that holds on
every admissible deterministic correlation and fails on the input.
"""
from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels as K
from .correlation import CharacteristicMatrix, Correlation, validate
from .cyclotomic import Cyclotomic, Sign, exact_value, real_sign, to_float
from .errors import BoundExceeded, NlsymError, PrecisionExhausted
from .groups import AbelianGroup
from .lp import ExactRHS, Membership, decide_membership

MAX_ADMISSIBLE = 500_000


class Status(str, enum.Enum):
    LOCAL = "LOCAL"
    NONLOCAL = "NONLOCAL"
    NUMERIC_INCONCLUSIVE = "NUMERIC_INCONCLUSIVE"

    def __str__(self):
        return self.value


class CertificateFailure(NlsymError):
    """A NONLOCAL certificate failed exact re-verification."""


# ---------------------------------------------------------------- certificates

def _perm_array(admissible, n) -> np.ndarray:
    if admissible is None:
        if math.factorial(n) > MAX_ADMISSIBLE:
            raise BoundExceeded(f"S_{n} has more than {MAX_ADMISSIBLE} elements")
        return K.permutations_array(n)
    arr = np.array([list(getattr(s, "table", s)) for s in admissible], dtype=np.int64).reshape(-1, n)
    return arr


def _value_of(value):
    if isinstance(value, dict):
        return exact_value(Cyclotomic.from_json(value))
    return Fraction(value)


def _value_json(value):
    if isinstance(value, Cyclotomic):
        return value.to_json()
    return {"exact": str(value), "approx": float(value)}


@dataclass
class Certificate:
    """Functional sum h(l,k|i,j) p(l,k|i,j) >= offset on all admissible p_pi."""

    labels: tuple
    coefficients: dict            # (l, k, i, j) index tuple -> Fraction
    offset: Fraction              # min over admissible deterministic correlations
    value: object = None          # exact value on the certified correlation
    admissible: list | None = None   # permutation tables; None means all of S_n

    @property
    def n(self) -> int:
        return len(self.labels)

    def tensor(self) -> tuple[np.ndarray, int]:
        fr = list(self.coefficients.values())
        L = 1
        for f in fr:
            L = L * f.denominator // math.gcd(L, f.denominator)
        n = self.n
        big = max((abs(f.numerator) * (L // f.denominator) for f in fr), default=0)
        H = np.zeros((n, n, n, n), dtype=np.int64 if big < 2 ** 40 else object)
        for idx, f in self.coefficients.items():
            H[idx] = int(f * L)
        return H, L

    def minimum(self, admissible=None) -> Fraction:
        """Exact min over admissible deterministic correlations."""
        adm = self.admissible if admissible is None else admissible
        perms = _perm_array(adm, self.n)
        H, L = self.tensor()
        vals = K.perm_values(H, perms)
        return Fraction(int(vals.min()), L)

    def evaluate(self, p: Correlation):
        """Exact h.p (float when p is numeric-only)."""
        if p.exact is None:
            return float(sum(float(f) * p.approx[idx] for idx, f in self.coefficients.items()))
        order, den, T = p.tensor
        acc = [Fraction(0)] * T.shape[-1]
        for idx, f in self.coefficients.items():
            row = T[idx]
            for t in range(len(acc)):
                if row[t]:
                    acc[t] += f * int(row[t])
        acc = [a / den for a in acc]
        if not any(acc[1:]):
            return acc[0]
        return Cyclotomic.from_fractions(acc, order)

    def verify(self, p: Correlation, admissible=None) -> bool:
        """Exact re-verification: min_adm h.p_pi >= offset and h.p < offset."""
        if self.minimum(admissible) < self.offset:
            return False
        v = self.evaluate(p)
        if isinstance(v, float):
            return v < float(self.offset)
        return real_sign(v - self.offset) == Sign.NEGATIVE

    def violation(self, p: Correlation):
        return self.evaluate(p) - self.offset

    def to_json(self) -> dict:
        lab = self.labels
        out = {
            "labels": list(lab),
            "hyperplane": [{"l": lab[l], "k": lab[k], "i": lab[i], "j": lab[j], "coef": str(f)}
                           for (l, k, i, j), f in sorted(self.coefficients.items())],
            "min_over_deterministic": str(self.offset),
        }
        if self.value is not None:
            out["value_on_p"] = _value_json(self.value)
        if self.admissible is not None:
            out["admissible"] = [list(a) for a in self.admissible]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Certificate":
        hyper = data["hyperplane"]
        if "labels" in data:
            labels = tuple(data["labels"])
        else:
            labels = tuple(sorted({e[key] for e in hyper for key in "lkij"}))
        pos = {lab: t for t, lab in enumerate(labels)}
        coeffs = {(pos[e["l"]], pos[e["k"]], pos[e["i"]], pos[e["j"]]): Fraction(e["coef"]) for e in hyper}
        value = data.get("value_on_p")
        if isinstance(value, dict) and "exact" in value:
            value = Fraction(value["exact"])
        elif value is not None:
            value = _value_of(value)
        adm = data.get("admissible")
        return cls(labels, coeffs, Fraction(data["min_over_deterministic"]), value,
                   None if adm is None else [tuple(a) for a in adm])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


@dataclass
class InvariantCertificate:
    """Functional sum h[a][b] D[a][b] >= offset on all averaged deterministic D."""

    group: AbelianGroup
    coefficients: dict           # (a, b) -> Fraction
    offset: Fraction
    value: object = None

    def minimum(self) -> Fraction:
        counts = invariant_vertices(self.group)
        n = self.group.order
        fr = list(self.coefficients.values())
        L = 1
        for f in fr:
            L = L * f.denominator // math.gcd(L, f.denominator)
        h = np.zeros((n, n), dtype=object)
        for (a, b), f in self.coefficients.items():
            h[a, b] = int(f * L)
        vals = counts.reshape(len(counts), -1).astype(object) @ h.ravel()
        return Fraction(int(min(vals)), L * n)

    def evaluate(self, D: CharacteristicMatrix):
        acc = Fraction(0)
        for (a, b), f in self.coefficients.items():
            acc = acc + f * D.entries[a, b]
        return exact_value(acc)

    def verify(self, D: CharacteristicMatrix) -> bool:
        if self.minimum() < self.offset:
            return False
        return real_sign(self.evaluate(D) - self.offset) == Sign.NEGATIVE

    def lift(self) -> Certificate:
        """The same functional written on correlation coordinates (i < j, l != k)."""
        G = self.group
        n = G.order
        diff = G.diff_table
        coeffs = {}
        for l, k in itertools.permutations(range(n), 2):
            for i, j in itertools.combinations(range(n), 2):
                c = (self.coefficients.get((int(diff[l, k]), int(diff[i, j])), 0)
                     + self.coefficients.get((int(diff[k, l]), int(diff[j, i])), 0))
                if c:
                    coeffs[(l, k, i, j)] = Fraction(c) / n
        return Certificate(tuple(range(n)), coeffs, self.offset, self.value)

    def to_json(self) -> dict:
        return {"group": str(self.group),
                "coefficients": [{"a": a, "b": b, "coef": str(f)}
                                 for (a, b), f in sorted(self.coefficients.items())],
                "min_over_deterministic": str(self.offset),
                "value_on_D": None if self.value is None else _value_json(self.value)}


# --------------------------------------------------------------------- verdicts

@dataclass
class LocalityVerdict:
    status: Status
    decomposition: dict = field(default_factory=dict)   # permutation tuple -> weight
    certificate: Certificate | InvariantCertificate | None = None
    gap: float = 0.0
    method: str = ""
    numeric_only: bool = False

    @property
    def is_local(self) -> bool:
        return self.status == Status.LOCAL

    def summary(self) -> str:
        if self.status == Status.LOCAL:
            return f"LOCAL ({len(self.decomposition)} deterministic terms; {self.method})"
        if self.status == Status.NONLOCAL:
            return f"NONLOCAL (violation {self.gap:.6g}; {self.method})"
        return f"NUMERIC_INCONCLUSIVE ({self.method})"


def _inconclusive(msg: str) -> LocalityVerdict:
    return LocalityVerdict(Status.NUMERIC_INCONCLUSIVE, method=msg, numeric_only=True)


def _t_coordinates(n: int):
    return [(l, k, i, j) for i, j in itertools.combinations(range(n), 2)
            for l, k in itertools.permutations(range(n), 2)]


# ----------------------------------------------------------- correlation space

def decide_local(p: Correlation, admissible=None, *, check: bool = True) -> LocalityVerdict:
    """LOCAL/NONLOCAL for p against conv{p_pi : pi admissible} (default all of S_n)."""
    n = p.n
    if check:
        problems = validate(p)
        if problems:
            raise ValueError(f"not a bijective correlation: {problems[0]}")
    perms = _perm_array(admissible, n)
    if not len(perms):
        raise ValueError("admissible set is empty")
    try:
        return _decide_local(p, perms, admissible)
    except PrecisionExhausted as exc:
        return _inconclusive(str(exc))


def _decide_local(p: Correlation, perms: np.ndarray, admissible) -> LocalityVerdict:
    n = p.n
    coords = _t_coordinates(n)
    if p.exact is None:
        nonzero = {c: abs(p.approx[c]) > 1e-12 for c in coords}
    else:
        T = p.tensor[2]
        nonzero = {c: bool(np.any(T[c])) for c in coords}
    support = [c for c in coords if nonzero[c]]
    zeros = [c for c in coords if not nonzero[c]]
    # keep permutations that never land on a zero coordinate
    keep = np.ones(len(perms), dtype=bool)
    for (l, k, i, j) in zeros:
        keep &= ~((perms[:, i] == l) & (perms[:, j] == k))
    cols = perms[keep]
    if not len(cols):
        coeffs = {c: Fraction(1) for c in zeros}
        cert = Certificate(p.labels, coeffs, Fraction(1), Fraction(0), _adm_list(admissible))
        cert.offset = cert.minimum(perms)
        return _finish_nonlocal(p, cert, perms, "no admissible permutation fits the support", 0.0)
    A = np.zeros((len(support), len(cols)), dtype=np.int64)
    for r, (l, k, i, j) in enumerate(support):
        A[r] = (cols[:, i] == l) & (cols[:, j] == k)
    # coordinates with identical incidence rows must carry equal values
    groups: dict = {}
    for r in range(len(support)):
        groups.setdefault(A[r].tobytes(), []).append(r)
    for rs in groups.values():
        for r in rs[1:]:
            d = p(*support[rs[0]]) - p(*support[r])
            if p.exact is None and abs(d) <= 1e-9:
                continue
            if p.exact is not None and d == 0:
                continue
            neg = d < 0 if p.exact is None else real_sign(exact_value(d)) == Sign.NEGATIVE
            a, c = (rs[0], r) if neg else (r, rs[0])
            coeffs = {support[a]: Fraction(1), support[c]: Fraction(-1)}
            return _lifted_nonlocal(p, coeffs, Fraction(0), zeros, perms, admissible,
                                    "coordinates with equal incidence carry different values")
    reps = [rs[0] for rs in groups.values()]
    support = [support[r] for r in reps]
    m = len(support)
    A = np.vstack([A[reps], np.ones((1, len(cols)), dtype=np.int64)])
    if p.exact is None:
        b = np.array([p.approx[c] for c in support] + [1.0])
        res = decide_membership(A, None, b, numeric_only=True)
    else:
        order, den, T = p.tensor
        rows = np.array([T[c] for c in support] + [[den] + [0] * (T.shape[-1] - 1)], dtype=T.dtype)
        res = decide_membership(A, ExactRHS(order, den, rows))
    if res.status == "LOCAL":
        decomp = {tuple(int(t) for t in cols[j]): w for j, w in res.weights.items()}
        if p.exact is not None and not verify_decomposition(p, decomp):
            raise CertificateFailure("LOCAL decomposition does not reproduce the correlation")
        return LocalityVerdict(Status.LOCAL, decomp, method=res.method, numeric_only=res.numeric_only)
    if res.status == "NUMERIC_INCONCLUSIVE":
        return _inconclusive(res.method)
    coeffs = {c: Fraction(h) if not isinstance(h, Fraction) else h
              for c, h in zip(support, res.h) if h != 0}
    if res.numeric_only:
        coeffs = {c: Fraction(float(f)).limit_denominator(10 ** 9) for c, f in coeffs.items()}
        offset = Fraction(res.offset).limit_denominator(10 ** 12)
    else:
        offset = res.offset
    return _lifted_nonlocal(p, coeffs, offset, zeros, perms, admissible, res.method,
                            res.value, float(res.gap), res.numeric_only)


def _lifted_nonlocal(p, coeffs, offset, zeros, perms, admissible, method,
                     value=None, gap=0.0, numeric_only=False) -> LocalityVerdict:
    """Extend a functional valid on the support-compatible columns to all admissible ones."""
    if zeros:
        neg = sum((min(f, 0) for f in coeffs.values()), Fraction(0))
        big = max(Fraction(offset) - neg, Fraction(1))
        for c in zeros:
            coeffs[c] = big
    cert = Certificate(p.labels, coeffs, offset, value, _adm_list(admissible))
    if numeric_only:
        cert.offset = cert.minimum(perms)
        return LocalityVerdict(Status.NONLOCAL, certificate=cert, gap=gap, method=method, numeric_only=True)
    return _finish_nonlocal(p, cert, perms, method, gap)


def _adm_list(admissible):
    if admissible is None:
        return None
    return [tuple(int(t) for t in getattr(s, "table", s)) for s in admissible]


def _finish_nonlocal(p, cert: Certificate, perms, method, gap) -> LocalityVerdict:
    if cert.value is None or p.exact is not None:
        cert.value = cert.evaluate(p)
    if not cert.verify(p, perms):
        raise CertificateFailure("NONLOCAL certificate failed exact re-verification")
    gap = to_float(cert.value - cert.offset) if p.exact is not None else gap
    return LocalityVerdict(Status.NONLOCAL, certificate=cert, gap=gap, method=method)


def verify_decomposition(p: Correlation, decomp: dict) -> bool:
    """Exact check that sum_pi w_pi p_pi reproduces p on every coordinate and w is a distribution."""
    n = p.n
    total = sum(decomp.values(), Fraction(0))
    if total != 1:
        return False
    for w in decomp.values():
        if real_sign(w) == Sign.NEGATIVE:
            return False
    order, den, T = p.tensor
    acc = {}
    for pi, w in decomp.items():
        for i in range(n):
            for j in range(n):
                key = (pi[i], pi[j], i, j)
                acc[key] = acc.get(key, 0) + w
    for idx in itertools.product(range(n), repeat=4):
        if acc.get(idx, 0) != p.exact[idx]:
            return False
    return True


def verify_certificate(cert, p, admissible=None) -> bool:
    if isinstance(cert, InvariantCertificate):
        return cert.verify(p)
    return cert.verify(p, admissible)


# -------------------------------------------------------- invariant (D) space

@lru_cache(maxsize=None)
def _invariant_vertices_cached(factors: tuple) -> tuple:
    G = AbelianGroup(factors)
    n = G.order
    if n > 10:
        raise BoundExceeded(f"|G| = {n} exceeds 10")
    perms = K.permutations_array(n, fix_first=True)
    uniq: dict = {}
    chunk = 40320
    for s in range(0, len(perms), chunk):
        block = perms[s:s + chunk]
        counts = K.diff_counts(block, G.add_table, G.diff_table).astype(np.int8)
        keys = counts.reshape(len(block), -1)
        _, first = np.unique(keys, axis=0, return_index=True)
        for t in first:
            key = keys[t].tobytes()
            if key not in uniq:
                uniq[key] = (counts[t].astype(np.int64), tuple(int(x) for x in block[t]))
    items = sorted(uniq.values(), key=lambda v: v[1])
    return np.array([c for c, _ in items]), tuple(pi for _, pi in items)


def invariant_vertices(G: AbelianGroup) -> np.ndarray:
    """Distinct integer matrices n*D_pi, D_pi the matrix of the group-averaged p_pi."""
    return _invariant_vertices_cached(G.factors)[0]


def invariant_vertex_perms(G: AbelianGroup) -> tuple:
    return _invariant_vertices_cached(G.factors)[1]


def decide_local_invariant(D: CharacteristicMatrix) -> LocalityVerdict:
    """LOCAL/NONLOCAL for the group-invariant correlation with characteristic matrix D."""
    G = D.group
    n = G.order
    if n > 10:
        raise BoundExceeded(f"|G| = {n} exceeds 10")
    try:
        return _decide_invariant(D)
    except PrecisionExhausted as exc:
        return _inconclusive(str(exc))


def _decide_invariant(D: CharacteristicMatrix) -> LocalityVerdict:
    G = D.group
    n = G.order
    order, den, T = D.tensor
    for b in range(n):
        want = den if b == 0 else 0
        if T[0, b, 0] != want or T[b, 0, 0] != want or np.any(T[0, b, 1:]) or np.any(T[b, 0, 1:]):
            raise ValueError("row/column of the identity must be the unit vector")
    verts = invariant_vertices(G)
    coords = [(a, b) for a in range(1, n) for b in range(1, n)]
    support = [c for c in coords if np.any(T[c])]
    zeros = [c for c in coords if not np.any(T[c])]
    keep = np.ones(len(verts), dtype=bool)
    for a, b in zeros:
        keep &= verts[:, a, b] == 0
    idx = np.flatnonzero(keep)
    if not len(idx):
        cert = InvariantCertificate(G, {c: Fraction(1) for c in zeros}, Fraction(0), Fraction(0))
        cert.offset = cert.minimum()
        return _finish_invariant(D, cert, "no averaged permutation fits the support")
    m = len(support)
    A = np.zeros((m + 1, len(idx)), dtype=np.int64)
    for r, (a, b) in enumerate(support):
        A[r] = verts[idx, a, b]
    A[m] = 1
    # right-hand side n*D so that it matches the integer counts
    rows = np.array([T[c] * n for c in support] + [[den] + [0] * (T.shape[-1] - 1)], dtype=T.dtype)
    res: Membership = decide_membership(A, ExactRHS(order, den, rows))
    if res.status == "LOCAL":
        perms = invariant_vertex_perms(G)
        decomp = {perms[int(idx[j])]: w for j, w in res.weights.items()}
        if not _verify_invariant_decomposition(D, decomp):
            raise CertificateFailure("LOCAL decomposition does not reproduce D")
        return LocalityVerdict(Status.LOCAL, decomp, method="D-space " + res.method)
    coeffs = {c: h for c, h in zip(support, res.h) if h != 0}
    if zeros:
        neg = sum((min(f, 0) for f in coeffs.values()), Fraction(0))
        big = max(Fraction(res.offset) - neg, Fraction(1))
        for c in zeros:
            coeffs[c] = big
    # A used counts = n*D_v, so in D units the functional is h*n
    coeffs = {c: f * n for c, f in coeffs.items()}
    cert = InvariantCertificate(G, coeffs, res.offset)
    return _finish_invariant(D, cert, "D-space " + res.method)


def _finish_invariant(D, cert: InvariantCertificate, method) -> LocalityVerdict:
    cert.value = cert.evaluate(D)
    if not cert.verify(D):
        raise CertificateFailure("NONLOCAL certificate failed exact re-verification")
    return LocalityVerdict(Status.NONLOCAL, certificate=cert, gap=to_float(cert.value - cert.offset),
                           method=method)


def _verify_invariant_decomposition(D: CharacteristicMatrix, decomp: dict) -> bool:
    G = D.group
    n = G.order
    if sum(decomp.values(), Fraction(0)) != 1:
        return False
    perms = np.array(list(decomp.keys()), dtype=np.int64)
    counts = K.diff_counts(perms, G.add_table, G.diff_table)
    for a in range(n):
        for b in range(n):
            acc = sum((w * int(c[a, b]) for w, c in zip(decomp.values(), counts)), Fraction(0))
            if exact_value(acc) != exact_value(D.entries[a, b] * n):
                return False
    return all(real_sign(w) != Sign.NEGATIVE for w in decomp.values())


def expand_invariant_decomposition(G: AbelianGroup, decomp: dict) -> dict:
    """Spread each averaged term over its double coset {s_b pi s_a}."""
    n = G.order
    add = G.add_table
    out: dict = {}
    for pi, w in decomp.items():
        share = w / (n * n)
        for a in range(n):
            for b in range(n):
                img = tuple(int(add[b, pi[add[a, x]]]) for x in range(n))
                out[img] = out.get(img, 0) + share
    return out
