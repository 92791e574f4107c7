"""Character-table quantum Latin squares and the survey over Sym of the dual group.

Vectors are kept unscaled: entry x of psi'_{a,b} is the root of unity
zeta_N ** (E[pi^-1(x), a] - E[x, b]), i.e. (P^pi C e_a)_x conj(C e_b)_x with
P^pi sending e_chi to e_pi(chi).  The scale 1/sqrt|G| is applied only when a
correlation or a characteristic matrix is formed.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels as K
from .correlation import (CharacteristicMatrix, Correlation, from_characteristic,
                          from_tensor)
from .cyclotomic import Cyclotomic, abs_squared, reduction_table, totient
from .errors import BoundExceeded
from .groups import (AbelianGroup, DualPermutation, GroupAutomorphism, affine_maps,
                     automorphism_group, dual_map)

MAX_SURVEY_ORDER = 10
DESK_ORDER = 6
PARALLEL_MIN_JOBS = 64


def _table(pi) -> np.ndarray:
    return np.asarray(getattr(pi, "table", pi), dtype=np.int64)


# ------------------------------------------------------------ the square itself

@dataclass(frozen=True, eq=False)
class QuantumLatinSquare:
    group: AbelianGroup
    pi: DualPermutation

    @cached_property
    def exponents(self) -> np.ndarray:
        """V[a, b, x] with psi'_{a,b}[x] = zeta_N ** V[a, b, x]."""
        G = self.group
        E = G.exponent_table
        inv = np.argsort(_table(self.pi))
        # E[inv[x], a] - E[x, b]
        return (E[inv][:, :, None] - E[:, None, :]).transpose(1, 2, 0) % G.exponent

    def vector(self, a: int, b: int) -> list[Cyclotomic]:
        N = self.group.exponent
        return [Cyclotomic.root(N, int(k)) for k in self.exponents[a, b]]

    def inner(self, a: int, b: int, c: int, d: int) -> Cyclotomic:
        """<psi'_{a,b}, psi'_{c,d}> = sum_x conj(psi'_{a,b}[x]) psi'_{c,d}[x]."""
        N = self.group.exponent
        V = self.exponents
        hist = np.bincount((V[c, d] - V[a, b]) % N, minlength=N)
        return Cyclotomic(N, [int(t) for t in hist])

    def is_orthogonal(self) -> bool:
        """Rows and columns are orthogonal families of norm^2 |G| (exact)."""
        n = self.group.order
        N = self.group.exponent
        V = self.exponents
        R = reduction_table(N)
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for u, v in (((a, b), (a, c)), ((b, a), (c, a))):
                        hist = np.bincount((V[v] - V[u]) % N, minlength=N)
                        red = hist @ R
                        want = np.zeros_like(red)
                        if u == v:
                            want[0] = n
                        if not np.array_equal(red, want):
                            return False
        return True

    def projections(self) -> np.ndarray:
        """Complex rank-one projections u[a, b] = psi psi^dagger (psi normalized)."""
        n = self.group.order
        N = self.group.exponent
        vecs = np.exp(2j * np.pi * self.exponents / N) / math.sqrt(n)
        return np.einsum("abx,aby->abxy", vecs, vecs.conj())

    def correlation(self) -> Correlation:
        """q(a,b|c,d) = |<psi'_{c,a}, psi'_{d,b}>|^2 / |G|^3, built from explicit inner products."""
        G = self.group
        n = G.order
        N = G.exponent
        V = self.exponents
        # K[c, a, d, b, x] = V[d, b, x] - V[c, a, x]
        Kx = (V[None, None, :, :, :] - V[:, :, None, None, :]) % N
        flat = Kx.reshape(-1, n)
        hist = np.zeros((len(flat), N), dtype=np.int64)
        np.add.at(hist, (np.repeat(np.arange(len(flat)), n), flat.ravel()), 1)
        uniq, inv = np.unique(hist, axis=0, return_inverse=True)
        d = totient(N)
        vals = np.zeros((len(uniq), d), dtype=np.int64)
        for t, h in enumerate(uniq):
            sq = abs_squared(Cyclotomic(N, [int(c) for c in h]))
            if sq.den != 1:
                raise AssertionError("inner product of integer vectors must be integral")
            vals[t, :len(sq.num)] = sq.num
        table = vals[inv.ravel()].reshape(n, n, n, n, d)      # [c, a, d, b]
        table = table.transpose(1, 3, 0, 2, 4)               # [a, b, c, d] = [l, k, i, j]
        return Correlation.from_tensor(tuple(range(n)), N, n ** 3, table, "qls")


def build_qls(G: AbelianGroup, pi) -> QuantumLatinSquare:
    pi = pi if isinstance(pi, DualPermutation) else DualPermutation(pi)
    if sorted(pi.table) != list(range(G.order)):
        raise ValueError("pi must be a permutation of the dual group")
    return QuantumLatinSquare(G, pi)


# ------------------------------------------------------- characteristic matrix

def characteristic_tensor(G: AbelianGroup, pi) -> np.ndarray:
    """|G|^2 D^pi as integer coefficients over Q(zeta_N), shape (n, n, phi(N))."""
    N = G.exponent
    hist = K.char_histogram(_table(pi), G.exponent_table, N)
    return K.autocorr_reduce(hist, reduction_table(N))


def characteristic_matrix(G: AbelianGroup, pi) -> CharacteristicMatrix:
    """D^pi = |G|^-2 (C^dag P^pi C) o conj(C^dag P^pi C)."""
    return CharacteristicMatrix(G, from_tensor(G.exponent, G.order ** 2, characteristic_tensor(G, pi)))


def qls_correlation(G: AbelianGroup, pi) -> Correlation:
    """q_pi via its characteristic matrix (fast path)."""
    return from_characteristic(characteristic_matrix(G, pi), provenance="qls")


# ------------------------------------------------------------------ classicality

def is_classical_qls(G: AbelianGroup, pi, auts=None) -> tuple[bool, tuple | None]:
    """Whether pi(x) = z sigma_hat(x); witness (z, sigma).  Cross-checked against D^pi."""
    auts = automorphism_group(G) if auts is None else auts
    t = _table(pi)
    z = int(t[0])
    shifted = G.add_table[G.neg[z]][t]
    witness = None
    for s in auts:
        if np.array_equal(dual_map(G, s).array(), shifted):
            witness = (z, s)
            break
    perm = characteristic_matrix(G, pi).is_permutation()
    if perm != (witness is not None):
        raise AssertionError("affine criterion and permutation-matrix criterion disagree")
    return witness is not None, witness


# ---------------------------------------------------------------------- orbits

@dataclass
class OrbitData:
    group: AbelianGroup
    representatives: list[np.ndarray]
    sizes: list[int]

    def __len__(self):
        return len(self.representatives)


def orbit_representatives(G: AbelianGroup, auts=None) -> OrbitData:
    """Lexicographic minima of the locality orbits of Sym(dual).

    The orbit of pi is {l o pi o r, l o (eta pi eta) o r : l, r affine}, where
    the affine maps x -> z sigma_hat(x) contain the translations (which fix
    the correlation) and the dual automorphisms (which fix locality).
    """
    n = G.order
    if n > MAX_SURVEY_ORDER:
        raise BoundExceeded(f"|G| = {n} exceeds {MAX_SURVEY_ORDER}")
    auts = automorphism_group(G) if auts is None else auts
    aff = np.array([m.table for m in affine_maps(G, auts)], dtype=np.int64)
    eta = G.neg
    total = math.factorial(n)
    seen = np.zeros(total, dtype=bool)
    reps, sizes = [], []
    step = 1 << 16
    for start in range(0, total, step):
        for off in np.flatnonzero(~seen[start:start + step]):
            r = start + int(off)
            if seen[r]:
                continue
            pi = K.lehmer_unrank(r, n)
            conj = eta[pi[eta]]
            ranks = []
            for base in (pi, conj):
                inner = base[aff]                 # base o r
                ranks.append(K.lehmer_rank(aff[:, inner].reshape(-1, n)))
            orbit = np.unique(np.concatenate(ranks))
            seen[orbit] = True
            reps.append(pi)
            sizes.append(len(orbit))
    if sum(sizes) != total:
        raise AssertionError("orbits do not partition the symmetric group")
    return OrbitData(G, reps, sizes)


# ---------------------------------------------------------------------- survey

@dataclass
class OrbitRecord:
    representative: tuple
    orbit_size: int
    distinct: int            # distinct correlations contributed first by this orbit
    key: str                 # short hash of D of the representative
    verdict: str
    certificate: dict | None = None


@dataclass
class SurveyReport:
    group: AbelianGroup
    distinct: int
    classical: int
    local: int
    nonlocal_: int
    automorphisms: int
    orbits: list[OrbitRecord] = field(default_factory=list)
    shared_keys: int = 0     # matrices reached from two different locality orbits
    seconds: float = 0.0

    def counts(self) -> tuple[int, int, int, int]:
        return self.distinct, self.classical, self.local, self.nonlocal_

    def line(self) -> str:
        return (f"{self.group}: distinct={self.distinct} classical={self.classical} "
                f"local={self.local} nonlocal={self.nonlocal_}")

    def to_json(self) -> dict:
        return {
            "group": str(self.group),
            "distinct": self.distinct, "classical": self.classical,
            "local": self.local, "nonlocal": self.nonlocal_,
            "automorphisms": self.automorphisms,
            "shared_keys": self.shared_keys, "seconds": self.seconds,
            "orbits": [vars(o) for o in self.orbits],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SurveyReport":
        orbits = [OrbitRecord(**{**o, "representative": tuple(o["representative"])}) for o in data["orbits"]]
        return cls(AbelianGroup.parse(data["group"]), data["distinct"], data["classical"], data["local"],
                   data["nonlocal"], data["automorphisms"], orbits, data.get("shared_keys", 0),
                   data.get("seconds", 0.0))


def _orbit_matrices(G, rep, dual_tables):
    """Distinct D^{s o rep o t} for s, t dual automorphisms, keyed by bytes."""
    out = {}
    for s in dual_tables:
        left = s[rep]
        for t in dual_tables:
            Dint = characteristic_tensor(G, left[t])
            out.setdefault(Dint.tobytes(), Dint)
    return out


def _verdict_for(args):
    from .locality import decide_local_invariant

    factors, Dint = args
    G = AbelianGroup(factors)
    D = CharacteristicMatrix(G, from_tensor(G.exponent, G.order ** 2, Dint))
    v = decide_local_invariant(D)
    cert = v.certificate.to_json() if v.certificate is not None else None
    return str(v.status), cert


def survey(G: AbelianGroup, *, extended: bool = False, workers: int = 1, progress=None) -> SurveyReport:
    n = G.order
    if n > MAX_SURVEY_ORDER:
        raise BoundExceeded(f"|G| = {n} exceeds {MAX_SURVEY_ORDER}")
    if n > DESK_ORDER and not extended:
        raise BoundExceeded(f"|G| = {n} needs an extended run")
    t0 = time.perf_counter()
    auts = automorphism_group(G)
    dual_tables = [dual_map(G, s).array() for s in auts]
    orbits = orbit_representatives(G, auts)
    owner: dict = {}
    per_orbit = []
    shared = 0
    for idx, rep in enumerate(orbits.representatives):
        mats = _orbit_matrices(G, rep, dual_tables)
        fresh = 0
        for key in mats:
            if key in owner:
                if owner[key] != idx:
                    shared += 1
                continue
            owner[key] = idx
            fresh += 1
        per_orbit.append((rep, mats, fresh))
    jobs = [(G.factors, characteristic_tensor(G, rep)) for rep, _, _ in per_orbit]
    if workers > 1 and len(jobs) > PARALLEL_MIN_JOBS:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_verdict_for, jobs, chunksize=8))
    else:
        results = []
        for t, job in enumerate(jobs):
            results.append(_verdict_for(job))
            if progress:
                progress(t + 1, len(jobs))
    n2 = n * n
    classical = local = nonlocal_ = 0
    records = []
    for idx, ((rep, mats, fresh), (status, cert), size) in enumerate(zip(per_orbit, results, orbits.sizes)):
        for key, Dint in mats.items():
            if owner[key] == idx and _is_permutation(Dint, n2):
                classical += 1
        if status == "LOCAL":
            local += fresh
        elif status == "NONLOCAL":
            nonlocal_ += fresh
        records.append(OrbitRecord(tuple(int(t) for t in rep), size, fresh,
                                   _short_key(characteristic_tensor(G, rep)), status, cert))
    report = SurveyReport(G, len(owner), classical, local, nonlocal_, len(auts), records, shared,
                          time.perf_counter() - t0)
    if classical != len(auts):
        raise AssertionError(f"classical count {classical} != |Aut| = {len(auts)}")
    return report


def _is_permutation(Dint: np.ndarray, n2: int) -> bool:
    if np.any(Dint[..., 1:]):
        return False
    v = Dint[..., 0]
    ones = v == n2
    return bool(np.all(ones | (v == 0)) and np.all(ones.sum(0) == 1) and np.all(ones.sum(1) == 1))


def _short_key(Dint) -> str:
    import hashlib

    return hashlib.sha1(np.ascontiguousarray(Dint, dtype=np.int64).tobytes()).hexdigest()[:12]
