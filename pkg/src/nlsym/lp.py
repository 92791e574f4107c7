"""Convex-hull membership for exact right-hand sides.

The question is whether b (exact, possibly irrational cyclotomic) lies in the
convex hull of the integer columns of A.  The last row of A must be the
normalization row (all ones, b = 1).  A float revised simplex answers first;
its answer is then certified:

* infeasible: the phase-1 dual is rounded to a rational functional h and
  the offset m = min_j h.A_j is computed exactly, so h.x >= m holds on every
  column by construction; only h.b < m needs checking (exactly, via real_sign).
* feasible: the positive support is re-solved exactly and checked for
  nonnegativity.

If neither certification succeeds the exact simplex (Bland's rule, rational
tableau, cyclotomic right-hand side) settles it.

Linearly dependent rows are dropped first (their consistency with b is then
checked exactly); a rank-deficient system makes the float basis drift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cyclotomic import Cyclotomic, Sign, real_sign

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
ROUNDING_DENOMINATORS = (10 ** 6, 10 ** 9, 10 ** 12)
PRIME = 2147483629


# ----------------------------------------------------------------- exact rhs

@dataclass(frozen=True)
class ExactRHS:
    """b_i = sum_k T[i, k] z_order^k / den."""

    order: int
    den: int
    T: np.ndarray

    @property
    def m(self) -> int:
        return self.T.shape[0]

    def value(self, i: int):
        return _make_value(self.order, [Fraction(int(c), self.den) for c in self.T[i]])

    def approx(self) -> np.ndarray:
        roots = np.cos(2 * np.pi * np.arange(self.T.shape[1]) / self.order)
        return (self.T.astype(float) @ roots) / self.den

    def is_rational(self) -> bool:
        return not np.any(self.T[:, 1:])

    def dot(self, h_int: np.ndarray, h_den: int):
        """Exact value of sum_i h_i b_i for h = h_int / h_den."""
        coeffs = _int_dot(h_int, self.T)
        return _make_value(self.order, [Fraction(int(c), h_den * self.den) for c in coeffs])


def _make_value(order, fracs):
    if not any(fracs[1:]):
        return fracs[0]
    return Cyclotomic.from_fractions(fracs, order)


def _int_dot(h_int: np.ndarray, M: np.ndarray) -> np.ndarray:
    """h_int @ M without overflow."""
    hb = max((abs(int(x)) for x in h_int), default=0)
    mb = int(np.abs(M).max()) if M.size and M.dtype != object else max((abs(int(x)) for x in M.ravel()), default=0)
    if M.dtype != object and hb * mb * max(len(h_int), 1) < 2 ** 62:
        return np.asarray(h_int, dtype=np.int64) @ M.astype(np.int64)
    return np.asarray(h_int, dtype=object) @ M.astype(object)


def _common_denominator(fracs) -> tuple[np.ndarray, int]:
    L = 1
    for f in fracs:
        L = L * f.denominator // math.gcd(L, f.denominator)
    return np.array([int(f * L) for f in fracs], dtype=object), L


# ------------------------------------------------------------------- results

@dataclass
class Phase1:
    feasible: bool
    x: np.ndarray
    basis: np.ndarray
    y: np.ndarray          # Farkas dual on original rows (meaningful when infeasible)
    objective: float
    iterations: int
    signs: np.ndarray = field(repr=False)


@dataclass
class Membership:
    status: str                          # LOCAL, NONLOCAL or NUMERIC_INCONCLUSIVE
    weights: dict = field(default_factory=dict)   # column -> exact weight
    h: list | None = None                # rational functional on the non-normalization rows
    offset: Fraction | None = None       # min_j h.A_j, exact
    value: object = None                 # h.b, exact
    gap: float = 0.0                     # float of value - offset
    method: str = ""
    numeric_only: bool = False


# ---------------------------------------------------------------- float phase 1

def float_phase1(A: np.ndarray, b: np.ndarray, max_iter: int | None = None) -> Phase1:
    """Phase-1 revised simplex for {x >= 0 : A x = b}.

    Dantzig pricing, switching to Bland's rule after a run of degenerate pivots.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, V = A.shape
    signs = np.where(b < 0, -1.0, 1.0)
    A = A * signs[:, None]
    b = b * signs
    basis = np.arange(V, V + m)
    Binv = np.eye(m)
    xB = b.copy()
    cB = np.ones(m)
    bland = False
    stall = 0
    obj = float(xB.sum())
    max_iter = max_iter or 50 * (m + V) + 1000
    it = 0
    scale = max(1.0, float(np.abs(b).max()))
    for it in range(1, max_iter + 1):
        y = cB @ Binv
        r = -(y @ A)
        r[basis[basis < V]] = 0.0
        neg = np.flatnonzero(r < -FEAS_TOL * 1e-2)
        if not len(neg):
            break
        j = int(neg[0]) if bland else int(neg[np.argmin(r[neg])])
        d = Binv @ A[:, j]
        pos = np.flatnonzero(d > PIVOT_TOL)
        if not len(pos):
            r[j] = 0.0
            break
        ratios = np.maximum(xB[pos], 0.0) / d[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12]
        if bland:
            row = int(ties[np.argmin(basis[ties])])
        else:
            art = ties[basis[ties] >= V]
            pool = art if len(art) else ties
            row = int(pool[np.argmax(d[pool])])
        theta = xB[row] / d[row]
        xB -= theta * d
        xB[row] = theta
        piv = Binv[row] / d[row]
        Binv -= np.outer(d, piv)
        Binv[row] = piv
        basis[row] = j
        cB[row] = 0.0
        new = float(cB @ xB)
        if new >= obj - 1e-13 * scale:
            stall += 1
            if stall > 30:
                bland = True
        else:
            stall = 0
        obj = new
        if it % 64 == 0:
            Binv, xB = _refactor(A, b, basis, V)
    Binv, xB = _refactor(A, b, basis, V)
    obj = float(cB @ np.maximum(xB, 0.0))
    y = (cB @ Binv) * signs
    x = np.zeros(V)
    mask = basis < V
    x[basis[mask]] = np.maximum(xB[mask], 0.0)
    return Phase1(obj <= FEAS_TOL * scale, x, basis.copy(), y, obj, it, signs)


def _refactor(A, b, basis, V):
    m = A.shape[0]
    B = np.empty((m, m))
    for r, j in enumerate(basis):
        if j < V:
            B[:, r] = A[:, j]
        else:
            B[:, r] = 0.0
            B[j - V, r] = 1.0
    try:
        Binv = np.linalg.inv(B)
    except np.linalg.LinAlgError:
        Binv = np.linalg.pinv(B)
    return Binv, Binv @ b


# ------------------------------------------------------------- fraction algebra

def solve_fractions(M, rhs):
    """Solve M X = rhs over Q (M: r x c, rhs: r x s, lists of Fractions).

    Returns a particular solution (free variables zero), or None if the
    system is inconsistent.
    """
    r = len(M)
    c = len(M[0]) if r else 0
    s = len(rhs[0]) if r else 0
    aug = [list(M[i]) + list(rhs[i]) for i in range(r)]
    pivots = []
    row = 0
    for col in range(c):
        p = next((i for i in range(row, r) if aug[i][col] != 0), None)
        if p is None:
            continue
        aug[row], aug[p] = aug[p], aug[row]
        inv = 1 / aug[row][col]
        aug[row] = [v * inv for v in aug[row]]
        for i in range(r):
            if i != row and aug[i][col] != 0:
                f = aug[i][col]
                ri = aug[i]
                rr = aug[row]
                aug[i] = [a - f * b for a, b in zip(ri, rr)]
        pivots.append(col)
        row += 1
        if row == r:
            break
    for i in range(row, r):
        if any(v != 0 for v in aug[i][c:]):
            return None
    X = [[Fraction(0)] * s for _ in range(c)]
    for i, col in enumerate(pivots):
        X[col] = aug[i][c:]
    return X


def _basis_matrix(A_int, basis, V):
    m = A_int.shape[0]
    B = [[Fraction(0)] * m for _ in range(m)]
    for r, j in enumerate(basis):
        if j < V:
            for i in range(m):
                B[i][r] = Fraction(int(A_int[i, j]))
        else:
            B[j - V][r] = Fraction(1)
    return B


# ----------------------------------------------------------- row reduction

def _rank_profile(M: np.ndarray, p: int = PRIME) -> list[int]:
    """Columns of M that are independent of the columns before them, mod p.

    Independence mod p implies independence over Q, so the selection is safe;
    it can only miss a column in the (negligible) case p divides a minor.
    """
    M = np.asarray(M, dtype=np.int64) % p
    rows, cols = M.shape
    out = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if not len(nz):
            continue
        k = r + int(nz[0])
        if k != r:
            M[[r, k]] = M[[k, r]]
        M[r] = M[r] * pow(int(M[r, c]), -1, p) % p
        f = M[r + 1:, c].copy()
        nzr = np.flatnonzero(f)
        if len(nzr):
            M[r + 1 + nzr] = (M[r + 1 + nzr] - np.outer(f[nzr], M[r]) % p) % p
        out.append(c)
        r += 1
    return out


def independent_rows(A_int: np.ndarray) -> list[int]:
    """A maximal independent set of rows of A, always containing the last one."""
    m = A_int.shape[0]
    order = [m - 1] + list(range(m - 1))
    picked = _rank_profile(np.asarray(A_int)[order].T)
    return sorted(order[k] for k in picked if order[k] != m - 1) + [m - 1]


def _dependency(A_int, keep, r) -> list[Fraction] | None:
    """Exact c with A[r] = sum_i c_i A[keep[i]], or None."""
    K = np.asarray(A_int)[keep]
    cols = _rank_profile(K)
    M = [[Fraction(int(K[i, j])) for i in range(len(keep))] for j in cols]
    X = solve_fractions(M, [[Fraction(int(A_int[r, j]))] for j in cols])
    if X is None:
        return None
    c = [x[0] for x in X]
    h_int, L = _common_denominator(c)
    if np.any(h_int @ K.astype(object) != L * np.asarray(A_int[r], dtype=object)):
        return None
    return c


def _row_value(A_int, r, weights):
    terms = [int(A_int[r, j]) * w for j, w in weights.items() if A_int[r, j]]
    return sum(terms[1:], terms[0]) if terms else Fraction(0)


def _dependent_row_check(A_int, rhs: ExactRHS, keep, weights) -> Membership | None:
    """Certificate from a dropped row whose value is inconsistent with the kept rows."""
    m = A_int.shape[0]
    for r in sorted(set(range(m)) - set(keep)):
        if _row_value(A_int, r, weights) == rhs.value(r):
            continue
        c = _dependency(A_int, keep, r)
        if c is None:
            continue
        h = [Fraction(0)] * m
        h[r] = Fraction(1)
        for i, ci in zip(keep, c):
            h[i] -= ci
        # h.A_j = 0 on every column, so dropping the normalization entry
        # leaves a constant offset and h.b - offset is the row defect
        b_coords = ExactRHS(rhs.order, rhs.den, rhs.T[:-1])
        for sgn in (1, -1):
            out = _certificate_membership([sgn * t for t in h[:-1]], A_int[:-1], b_coords,
                                          "inconsistent dependent row")
            if out is not None:
                return out
    return None


# ---------------------------------------------------------------- certificates

def offset_for(h: list[Fraction], A_coords: np.ndarray) -> Fraction:
    """min over columns of h . A_j, exactly."""
    h_int, L = _common_denominator(h)
    vals = _int_dot(h_int, A_coords)
    return Fraction(int(vals.min()), L)


def _certify(h, A_coords, b_coords: ExactRHS):
    """Exact (offset, value, sign of value - offset) for a rational functional h."""
    h_int, L = _common_denominator(h)
    vals = _int_dot(h_int, A_coords)
    offset = Fraction(int(vals.min()), L)
    value = b_coords.dot(h_int, L)
    return offset, value, real_sign(value - offset)


def _round(v: np.ndarray, limit: int) -> list[Fraction]:
    s = float(np.abs(v).max()) or 1.0
    out = []
    for t in v / s:
        if abs(t) < 1e-10:
            out.append(Fraction(0))
        else:
            out.append(Fraction(float(t)).limit_denominator(limit))
    return out


def _certificate_membership(h, A_coords, b_coords, method) -> Membership | None:
    offset, value, sign = _certify(h, A_coords, b_coords)
    if sign != Sign.NEGATIVE:
        return None
    gap = float(value - offset) if not isinstance(value, Cyclotomic) else (value - offset).approx.real
    return Membership("NONLOCAL", h=h, offset=offset, value=value, gap=gap, method=method)


# ------------------------------------------------------------ exact supports

def _snap_solve(A_S: np.ndarray, rhs: ExactRHS):
    """Float least squares snapped to rationals, kept only if A_S X = T / den exactly."""
    X, *_ = np.linalg.lstsq(A_S.astype(float), rhs.T.astype(float) / rhs.den, rcond=None)
    fr = [[Fraction(float(x)).limit_denominator(10 ** 9) for x in row] for row in X]
    L = 1
    for row in fr:
        for x in row:
            L = L * x.denominator // math.gcd(L, x.denominator)
    Xi = np.array([[int(x * L) for x in row] for row in fr], dtype=object)
    if np.array_equal(A_S.astype(object) @ Xi * rhs.den, rhs.T.astype(object) * L):
        return fr
    return None


def _support_solve(A_int, rhs: ExactRHS, support):
    """Exact weights on support columns solving A_S w = b, or None."""
    m = A_int.shape[0]
    X = _snap_solve(A_int[:, support], rhs) if support else None
    if X is None:
        M = [[Fraction(int(A_int[i, j])) for j in support] for i in range(m)]
        R = [[Fraction(int(c), rhs.den) for c in rhs.T[i]] for i in range(m)]
        X = solve_fractions(M, R)
    if X is None:
        return None
    weights = {}
    for j, coeffs in zip(support, X):
        w = _make_value(rhs.order, coeffs)
        if w == 0:
            continue
        if real_sign(w) == Sign.NEGATIVE:
            return None
        weights[int(j)] = w
    return weights


# --------------------------------------------------------------- exact simplex

def exact_phase1(A_int: np.ndarray, rhs: ExactRHS, start_basis=None):
    """Exact phase-1 simplex with Bland's rule.

    The tableau is rational; basic values are cyclotomic coefficient rows and
    are compared through real_sign.  Returns ("LOCAL", weights) or
    ("NONLOCAL", y) with y rational, y.A_j <= 0 for all j and y.b > 0.
    """
    m, V = A_int.shape
    d = rhs.T.shape[1]
    signs = [(-1 if real_sign(rhs.value(i)) == Sign.NEGATIVE else 1) for i in range(m)]
    A = np.array([[int(A_int[i, j]) * signs[i] for j in range(V)] for i in range(m)], dtype=object)
    b = [[Fraction(int(c) * signs[i], rhs.den) for c in rhs.T[i]] for i in range(m)]
    basis = list(range(V, V + m))
    Binv = [[Fraction(int(i == k)) for k in range(m)] for i in range(m)]
    xB = [row[:] for row in b]

    def val(row):
        return _make_value(rhs.order, row)

    for _ in range(100000):
        cB = [Fraction(1) if j >= V else Fraction(0) for j in basis]
        y = [sum((cB[r] * Binv[r][i] for r in range(m)), Fraction(0)) for i in range(m)]
        y_int, L = _common_denominator(y)
        red = -(y_int @ A)
        in_basis = set(basis)
        enter = next((j for j in range(V) if red[j] < 0 and j not in in_basis), None)
        if enter is None:
            break
        col = [Fraction(int(A[i, enter])) for i in range(m)]
        dcol = [sum((Binv[i][k] * col[k] for k in range(m) if col[k]), Fraction(0)) for i in range(m)]
        leave, best = None, None
        for i in range(m):
            if dcol[i] <= 0:
                continue
            ratio = [c / dcol[i] for c in xB[i]]
            if leave is None:
                leave, best = i, ratio
                continue
            s = real_sign(val([a - c for a, c in zip(ratio, best)]))
            if s == Sign.NEGATIVE or (s == Sign.ZERO and basis[i] < basis[leave]):
                leave, best = i, ratio
        if leave is None:
            break
        piv = dcol[leave]
        Binv[leave] = [v / piv for v in Binv[leave]]
        xB[leave] = [v / piv for v in xB[leave]]
        for i in range(m):
            if i != leave and dcol[i] != 0:
                f = dcol[i]
                Binv[i] = [a - f * c for a, c in zip(Binv[i], Binv[leave])]
                xB[i] = [a - f * c for a, c in zip(xB[i], xB[leave])]
        basis[leave] = enter
    art = [Fraction(0)] * d
    for i, j in enumerate(basis):
        if j >= V:
            art = [a + c for a, c in zip(art, xB[i])]
    if real_sign(val(art)) == Sign.POSITIVE:
        cB = [Fraction(1) if j >= V else Fraction(0) for j in basis]
        y = [sum((cB[r] * Binv[r][i] for r in range(m)), Fraction(0)) * signs[i] for i in range(m)]
        return "NONLOCAL", y
    weights = {}
    for i, j in enumerate(basis):
        if j < V:
            w = val(xB[i])
            if w != 0:
                weights[int(j)] = w
    return "LOCAL", weights


# -------------------------------------------------------------------- driver

def decide_membership(A_int: np.ndarray, rhs: ExactRHS | None, b_float: np.ndarray | None = None,
                      *, numeric_only: bool = False) -> Membership:
    """Is b in conv(columns of A_int)?  The last row must be the normalization row."""
    A_int = np.asarray(A_int)
    m, V = A_int.shape
    if not np.all(A_int[-1] == 1):
        raise ValueError("last row of A must be the normalization row")
    keep = independent_rows(A_int)
    if len(keep) == m:
        return _decide_membership(A_int, rhs, b_float, numeric_only)
    bf = rhs.approx() if rhs is not None else np.asarray(b_float, dtype=float)
    sub_rhs = None if rhs is None else ExactRHS(rhs.order, rhs.den, rhs.T[keep])
    res = _decide_membership(A_int[keep], sub_rhs, bf[keep], numeric_only)
    if res.status == "LOCAL":
        if not res.numeric_only:
            bad = _dependent_row_check(A_int, rhs, keep, res.weights)
            if bad is not None:
                return bad
        else:
            w = np.zeros(V)
            for j, x in res.weights.items():
                w[j] = float(x)
            resid = A_int @ w - bf
            if np.abs(resid).max() > 1e-7:
                return Membership("NUMERIC_INCONCLUSIVE", method="float LP, dependent rows disagree",
                                  numeric_only=True)
        return res
    if res.h is not None:
        h = [0] * (m - 1)
        for i, t in zip(keep[:-1], res.h):
            h[i] = t
        zero = Fraction(0) if not res.numeric_only else 0.0
        res.h = [zero if t == 0 else t for t in h]
    return res


def _decide_membership(A_int, rhs, b_float, numeric_only) -> Membership:
    m, V = A_int.shape
    bf = rhs.approx() if rhs is not None else np.asarray(b_float, dtype=float)
    res = float_phase1(A_int.astype(float), bf)
    coords = A_int[:-1]
    if numeric_only or rhs is None:
        return _numeric_membership(res, coords, bf)
    b_coords = ExactRHS(rhs.order, rhs.den, rhs.T[:-1])
    if not res.feasible:
        g = res.y[:-1]
        for limit in ROUNDING_DENOMINATORS:
            h = [-t for t in _round(g, limit)]
            out = _certificate_membership(h, coords, b_coords, f"float LP, rounded dual (q <= {limit:.0e})")
            if out:
                return out
        y = _exact_dual(A_int, res)
        if y is not None:
            out = _certificate_membership([-t for t in y[:-1]], coords, b_coords, "float LP, exact basis dual")
            if out:
                return out
    else:
        support = [int(j) for j in res.basis if j < V and res.x[j] > 1e-12]
        weights = _support_solve(A_int, rhs, support)
        if weights is not None:
            return Membership("LOCAL", weights=weights, method="float LP, exact support solve")
    status, payload = exact_phase1(A_int, rhs)
    if status == "LOCAL":
        return Membership("LOCAL", weights=payload, method="exact simplex")
    out = _certificate_membership([-t for t in payload[:-1]], coords, b_coords, "exact simplex dual")
    if out is None:
        raise AssertionError("exact simplex dual failed to certify")
    return out


def _exact_dual(A_int, res: Phase1):
    m, V = A_int.shape
    B = _basis_matrix(A_int * res.signs[:, None].astype(int), res.basis, V)
    Bt = [[B[k][i] for k in range(m)] for i in range(m)]
    cB = [[Fraction(1) if j >= V else Fraction(0)] for j in res.basis]
    sol = solve_fractions(Bt, cB)
    if sol is None:
        return None
    return [sol[i][0] * int(res.signs[i]) for i in range(m)]


def _numeric_membership(res: Phase1, coords, bf) -> Membership:
    if res.feasible:
        w = {int(j): float(res.x[j]) for j in np.flatnonzero(res.x > 1e-12)}
        return Membership("LOCAL", weights=w, method="float LP", numeric_only=True)
    h = -res.y[:-1]
    vals = h @ coords
    offset = float(vals.min())
    value = float(h @ bf[:-1])
    status = "NONLOCAL" if value - offset < -1e-7 * max(1.0, float(np.abs(h).max())) else "NUMERIC_INCONCLUSIVE"
    return Membership(status, h=list(h), offset=offset, value=value, gap=value - offset,
                      method="float LP", numeric_only=True)
