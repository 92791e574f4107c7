"""Time the numba kernels against their pure-numpy counterparts.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs on the same inputs under both backends; results are checked
for equality before timings are reported.  The numba figures exclude the
first (compiling) call.
"""
from __future__ import annotations

import argparse
import itertools
import time

import numpy as np

from nlsym import _kernels as K
from nlsym.cyclotomic import reduction_table
from nlsym.groups import AbelianGroup


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases():
    G = AbelianGroup((2, 2, 2))
    perms = K.permutations_array(8, fix_first=True)
    yield ("diff_counts  Z2^3, 5040 perms",
           lambda: K.diff_counts_np(perms, G.add_table, G.diff_table),
           lambda: K._diff_counts_nb(perms, G.add_table, G.diff_table))

    Z = AbelianGroup((8,))
    E = Z.exponent_table
    sample = K.permutations_array(8)[::40]
    R = reduction_table(8)

    def qls_np():
        return [K.autocorr_reduce_np(K.char_histogram_np(p, E, 8), R) for p in sample]

    def qls_nb():
        out = []
        for p in sample:
            h = K._char_histogram_nb(p, E, 8)
            d = K._autocorr_nb(h.reshape(-1, 8)).reshape(h.shape)
            out.append(d @ R)
        return out

    yield (f"char matrix  Z8, {len(sample)} perms", qls_np, qls_nb)

    all8 = K.permutations_array(8)
    fact = np.array([1, 1, 2, 6, 24, 120, 720, 5040, 40320], dtype=np.int64)
    yield ("lehmer_rank  S8, 40320 perms",
           lambda: K.lehmer_rank_np(all8), lambda: K._lehmer_rank_nb(all8, fact))

    rng = np.random.default_rng(0)
    H = rng.integers(-5, 6, size=(7, 7, 7, 7)).astype(np.int64)
    all7 = K.permutations_array(7)
    yield ("perm_values  S7, 5040 perms",
           lambda: K.perm_values_np(H, all7), lambda: K._perm_values_nb(H, all7))


def _same(a, b) -> bool:
    if isinstance(a, list):
        return all(np.array_equal(x, y) for x, y in itertools.zip_longest(a, b))
    return np.array_equal(a, b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not K.HAS_NUMBA:
        print("numba unavailable (or NLSYM_NO_NUMBA set); timing the numpy path only")
    print(f"{'kernel':36s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for label, f_np, f_nb in cases():
        t_np, r_np = _time(f_np, args.repeat)
        if K.HAS_NUMBA:
            f_nb()  # compile
            t_nb, r_nb = _time(f_nb, args.repeat)
            if not _same(r_np, r_nb):
                raise SystemExit(f"{label}: backends disagree")
            print(f"{label:36s} {t_np * 1e3:11.2f} {t_nb * 1e3:11.2f} {t_np / t_nb:7.1f}x")
        else:
            print(f"{label:36s} {t_np * 1e3:11.2f} {'-':>11s} {'-':>8s}")


if __name__ == "__main__":
    main()
