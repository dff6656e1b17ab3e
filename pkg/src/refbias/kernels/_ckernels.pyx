# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Must stay bit-identical to `_pykernels`: same counter-based stream
(`_splitmix`), same operation order for every floating-point step. The
recipient search is a full-array right-bisect, matching
np.searchsorted(cum, target, side="right").
"""

from libc.stdint cimport int64_t, uint64_t

import numpy as np

BACKEND = "cython"

cdef uint64_t GOLD = <uint64_t>0x9E3779B97F4A7C15
cdef double TWO_NEG53 = 1.0 / 9007199254740992.0
cdef int MAX_POISSON = 15


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z ^= z >> 30
    z *= <uint64_t>0xBF58476D1CE4E5B9
    z ^= z >> 27
    z *= <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t counter) nogil:
    return <double>(_mix64(key + (counter + 1) * GOLD) >> 11) * TWO_NEG53


def whistle_null_samples(
    const double[::1] b_ic,
    const double[::1] b_inc,
    const signed char[::1] sign,
    object seed,
    Py_ssize_t rep_start,
    Py_ssize_t rep_end,
):
    """Net whistle gain per replicate for replicates [rep_start, rep_end)."""
    cdef Py_ssize_t n = b_ic.shape[0]
    cdef Py_ssize_t nrep = rep_end - rep_start
    out_arr = np.zeros(max(nrep, 0), dtype=np.int64)
    if n == 0 or nrep <= 0:
        return out_arr
    cdef int64_t[::1] out = out_arr
    cdef uint64_t s = <uint64_t>seed
    cdef uint64_t key
    cdef Py_ssize_t r, i
    cdef int64_t acc
    cdef double u
    with nogil:
        for r in range(rep_start, rep_end):
            key = _mix64(s + (<uint64_t>(r + 1)) * GOLD)
            acc = 0
            for i in range(n):
                u = _uniform(key, <uint64_t>i)
                if u < b_ic[i]:
                    acc -= sign[i]
                elif u < b_inc[i]:
                    acc += sign[i]
            out[r - rep_start] = acc
    return out_arr


cdef inline Py_ssize_t _bisect_right(const double[::1] cum, double target) nogil:
    cdef Py_ssize_t lo = 0
    cdef Py_ssize_t hi = cum.shape[0]
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum[mid] > target:
            hi = mid
        else:
            lo = mid + 1
    return lo


def race_null_samples(
    const double[::1] q,
    const double[::1] exp_neg_lam,
    bint poisson,
    const double[::1] base,
    const double[::1] total,
    const double[::1] cum,
    const int64_t[::1] slice_end,
    const int64_t[::1] lastpos,
    const signed char[::1] same_flag,
    double same_per48,
    double diff_per48,
    object seed,
    Py_ssize_t rep_start,
    Py_ssize_t rep_end,
):
    """Null technical-foul rate gap per replicate.

    Counter layout per referee-game pair p: counter 16p decides the foul
    count, counters 16p+1.. pick recipients by cumulative minutes.
    """
    cdef Py_ssize_t n_pairs = q.shape[0]
    cdef Py_ssize_t nrep = rep_end - rep_start
    out_arr = np.zeros(max(nrep, 0), dtype=np.float64)
    if n_pairs == 0 or nrep <= 0:
        return out_arr
    cdef double[::1] out = out_arr
    cdef uint64_t s = <uint64_t>seed
    cdef uint64_t key, c0
    cdef Py_ssize_t r, p, idx, end_p
    cdef int k, t
    cdef int64_t same_cnt, diff_cnt
    cdef double u1, u2, target, pmf, cdf
    with nogil:
        for r in range(rep_start, rep_end):
            key = _mix64(s + (<uint64_t>(r + 1)) * GOLD)
            same_cnt = 0
            diff_cnt = 0
            for p in range(n_pairs):
                c0 = (<uint64_t>p) * 16
                u1 = _uniform(key, c0)
                if poisson:
                    pmf = exp_neg_lam[p]
                    cdf = pmf
                    k = 0
                    while u1 >= cdf and k < MAX_POISSON:
                        k += 1
                        pmf = pmf * (q[p] / <double>k)
                        cdf = cdf + pmf
                else:
                    k = 1 if u1 < q[p] else 0
                for t in range(k):
                    u2 = _uniform(key, c0 + 1 + <uint64_t>t)
                    target = u2 * total[p] + base[p]
                    idx = _bisect_right(cum, target)
                    end_p = slice_end[p]
                    if idx >= end_p:
                        idx = end_p - 1
                    idx = lastpos[idx]
                    if same_flag[idx]:
                        same_cnt += 1
                    else:
                        diff_cnt += 1
            out[r - rep_start] = (<double>diff_cnt) / diff_per48 - (<double>same_cnt) / same_per48
    return out_arr
