"""Hot loops, with numba and pure-numpy implementations.

The numba path is used when numba imports cleanly and NLSYM_NO_NUMBA is not
set to a truthy value.  Both paths return identical integer results; the
benchmark in benchmarks/bench_kernels.py compares their speed.
"""
from __future__ import annotations

import math
import os

import numpy as np

numba_default = {"nogil": True, "cache": True}


def _numba_requested() -> bool:
    return os.environ.get("NLSYM_NO_NUMBA", "").strip().lower() in ("", "0", "false", "no")


try:
    if not _numba_requested():
        raise ImportError("disabled by NLSYM_NO_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"


# ---------------------------------------------------------------- numpy path

def diff_counts_np(perms, add, diff):
    """counts[p, a, b] = #{y : perm_p(y)^-1 perm_p(y b) = a}."""
    perms = np.asarray(perms, dtype=np.int64)
    P, n = perms.shape
    out = np.zeros((P, n, n), dtype=np.int64)
    rows = np.arange(P)[:, None] * n
    for b in range(n):
        a = diff[perms, perms[:, add[:, b]]]
        out[:, :, b] = np.bincount((rows + a).ravel(), minlength=P * n).reshape(P, n)
    return out


def char_histogram_np(pi, E, N):
    """hist[a, b, k] = #{y : E[y, b] - E[pi(y), a] = k mod N}."""
    pi = np.asarray(pi, dtype=np.int64)
    n = len(pi)
    K = (E[:, None, :] - E[pi][:, :, None]) % N  # [y, a, b]
    flat = (np.arange(n * n).reshape(n, n) * N)[None, :, :] + K
    return np.bincount(flat.ravel(), minlength=n * n * N).reshape(n, n, N)


def autocorr_reduce_np(hist, R):
    """Reduced coefficients of |sum_k hist[..., k] z^k|^2 modulo Phi_N."""
    hist = np.asarray(hist, dtype=np.int64)
    N = hist.shape[-1]
    d = np.empty_like(hist)
    for k in range(N):
        d[..., k] = (hist * np.roll(hist, k, axis=-1)).sum(axis=-1)
    return d @ R


def lehmer_rank_np(perms):
    perms = np.asarray(perms, dtype=np.int64)
    P, n = perms.shape
    ranks = np.zeros(P, dtype=np.int64)
    for i in range(n):
        smaller = (perms[:, i + 1:] < perms[:, i:i + 1]).sum(axis=1)
        ranks += smaller * math.factorial(n - 1 - i)
    return ranks


def perm_values_np(H, perms):
    """vals[p] = sum_{i,j} H[perm(i), perm(j), i, j]."""
    perms = np.asarray(perms, dtype=np.int64)
    n = perms.shape[1]
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    i, j = i.ravel(), j.ravel()
    return H[perms[:, i], perms[:, j], i, j].sum(axis=1)


# ---------------------------------------------------------------- numba path

if HAS_NUMBA:

    @njit(**numba_default)
    def _diff_counts_nb(perms, add, diff):
        P, n = perms.shape
        out = np.zeros((P, n, n), dtype=np.int64)
        for p in range(P):
            for y in range(n):
                u = perms[p, y]
                for b in range(n):
                    a = diff[u, perms[p, add[y, b]]]
                    out[p, a, b] += 1
        return out

    @njit(**numba_default)
    def _char_histogram_nb(pi, E, N):
        n = pi.shape[0]
        out = np.zeros((n, n, N), dtype=np.int64)
        for y in range(n):
            py = pi[y]
            for a in range(n):
                ea = E[py, a]
                for b in range(n):
                    out[a, b, (E[y, b] - ea) % N] += 1
        return out

    @njit(**numba_default)
    def _autocorr_nb(flat):
        M, N = flat.shape
        d = np.zeros((M, N), dtype=np.int64)
        for m in range(M):
            for k in range(N):
                s = 0
                for j in range(N):
                    s += flat[m, j] * flat[m, (j - k) % N]
                d[m, k] = s
        return d

    @njit(**numba_default)
    def _lehmer_rank_nb(perms, fact):
        P, n = perms.shape
        ranks = np.zeros(P, dtype=np.int64)
        for p in range(P):
            r = 0
            for i in range(n):
                c = 0
                for j in range(i + 1, n):
                    if perms[p, j] < perms[p, i]:
                        c += 1
                r += c * fact[n - 1 - i]
            ranks[p] = r
        return ranks

    @njit(**numba_default)
    def _perm_values_nb(H, perms):
        P, n = perms.shape
        out = np.zeros(P, dtype=H.dtype)
        for p in range(P):
            s = H[0, 0, 0, 0] * 0
            for i in range(n):
                pi = perms[p, i]
                for j in range(n):
                    s += H[pi, perms[p, j], i, j]
            out[p] = s
        return out


# ---------------------------------------------------------------- dispatch

def diff_counts(perms, add, diff):
    if HAS_NUMBA:
        return _diff_counts_nb(np.ascontiguousarray(perms, dtype=np.int64),
                               np.ascontiguousarray(add, dtype=np.int64),
                               np.ascontiguousarray(diff, dtype=np.int64))
    return diff_counts_np(perms, add, diff)


def char_histogram(pi, E, N):
    if HAS_NUMBA:
        return _char_histogram_nb(np.ascontiguousarray(pi, dtype=np.int64),
                                  np.ascontiguousarray(E, dtype=np.int64), N)
    return char_histogram_np(pi, E, N)


def autocorr_reduce(hist, R):
    if HAS_NUMBA:
        hist = np.asarray(hist, dtype=np.int64)
        flat = np.ascontiguousarray(hist.reshape(-1, hist.shape[-1]))
        d = _autocorr_nb(flat).reshape(hist.shape)
        return d @ R
    return autocorr_reduce_np(hist, R)


def lehmer_rank(perms):
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    if HAS_NUMBA:
        n = perms.shape[1]
        fact = np.array([math.factorial(k) for k in range(n + 1)], dtype=np.int64)
        return _lehmer_rank_nb(perms, fact)
    return lehmer_rank_np(perms)


def lehmer_unrank(rank: int, n: int) -> np.ndarray:
    pool = list(range(n))
    out = []
    for i in range(n - 1, -1, -1):
        f = math.factorial(i)
        q, rank = divmod(rank, f)
        out.append(pool.pop(q))
    return np.array(out, dtype=np.int64)


def perm_values(H, perms):
    """Linear functional H evaluated on deterministic correlations, batched."""
    if HAS_NUMBA and H.dtype != object:
        return _perm_values_nb(np.ascontiguousarray(H), np.ascontiguousarray(perms, dtype=np.int64))
    return perm_values_np(H, perms)


def permutations_array(n: int, fix_first: bool = False) -> np.ndarray:
    """All permutations of range(n) in lexicographic order (optionally with 0 fixed)."""
    import itertools

    if fix_first:
        rest = np.array(list(itertools.permutations(range(1, n))), dtype=np.int8).reshape(-1, n - 1)
        return np.hstack([np.zeros((len(rest), 1), dtype=np.int8), rest]).astype(np.int64)
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
