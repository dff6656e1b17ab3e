"""Numpy fallback implementations of the simulation kernels.

Bit-identical to the Cython backend: both consume the counter-based
stream defined in `_splitmix`, and every floating-point operation is
ordered the same way. Replicates are processed in blocks so the work is
vectorized even for short ledgers.
"""

from __future__ import annotations

import numpy as np

from ._splitmix import GOLDEN, TWO_NEG53

BACKEND = "python"

_GOLD = np.uint64(GOLDEN)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MAX_POISSON = 15
_BLOCK_BUDGET = 1 << 16


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


def _unit(bits: np.ndarray) -> np.ndarray:
    return (bits >> np.uint64(11)).astype(np.float64) * TWO_NEG53


def _replicate_keys(seed: int, rep_start: int, rep_end: int) -> np.ndarray:
    reps = np.arange(rep_start + 1, rep_end + 1, dtype=np.uint64)
    return _mix64(reps * _GOLD + np.uint64(seed))


def event_uniforms(seed: int, replicate: int, n: int) -> np.ndarray:
    """Uniforms at counters 0..n-1 of one replicate's sub-stream."""
    key = _replicate_keys(seed, replicate, replicate + 1)[0]
    counters = np.arange(1, n + 1, dtype=np.uint64) * _GOLD
    return _unit(_mix64(key + counters))


def whistle_null_samples(
    b_ic: np.ndarray,
    b_inc: np.ndarray,
    sign: np.ndarray,
    seed: int,
    rep_start: int,
    rep_end: int,
) -> np.ndarray:
    """Net whistle gain per replicate for replicates [rep_start, rep_end).

    Per event: u < b_ic is an incorrect call (gain -sign), u < b_inc an
    incorrect non-call (gain +sign), otherwise a correct call (gain 0).
    """
    n = b_ic.shape[0]
    nrep = rep_end - rep_start
    out = np.zeros(nrep, dtype=np.int64)
    if n == 0 or nrep == 0:
        return out
    counters = np.arange(1, n + 1, dtype=np.uint64) * _GOLD
    sign64 = sign.astype(np.int64)
    block = max(1, min(nrep, _BLOCK_BUDGET // n))
    pos = 0
    r = rep_start
    while r < rep_end:
        b = min(block, rep_end - r)
        keys = _replicate_keys(seed, r, r + b)
        u = _unit(_mix64(keys[:, None] + counters[None, :]))
        contrib = (u < b_inc).astype(np.int64) - 2 * (u < b_ic).astype(np.int64)
        out[pos : pos + b] = (contrib * sign64).sum(axis=1)
        pos += b
        r += b
    return out


def _tech_counts(
    u1: np.ndarray, q: np.ndarray, exp_neg_lam: np.ndarray, poisson: bool
) -> np.ndarray:
    """Simulated technical-foul count per (replicate, referee-game) cell."""
    if not poisson:
        return (u1 < q).astype(np.int64)
    shape = u1.shape
    pmf = np.broadcast_to(exp_neg_lam, shape).astype(np.float64).copy()
    cdf = pmf.copy()
    count = np.zeros(shape, dtype=np.int64)
    for k in range(1, _MAX_POISSON + 1):
        active = u1 >= cdf
        if not active.any():
            break
        pmf = np.where(active, pmf * (q / k), pmf)
        cdf = np.where(active, cdf + pmf, cdf)
        count += active
    return count


def race_null_samples(
    q: np.ndarray,
    exp_neg_lam: np.ndarray,
    poisson: bool,
    base: np.ndarray,
    total: np.ndarray,
    cum: np.ndarray,
    slice_end: np.ndarray,
    lastpos: np.ndarray,
    same_flag: np.ndarray,
    same_per48: float,
    diff_per48: float,
    seed: int,
    rep_start: int,
    rep_end: int,
) -> np.ndarray:
    """Null technical-foul rate gap per replicate.

    Counter layout per referee-game pair p: counter 16p decides the foul
    count, counters 16p+1.. pick recipients by cumulative minutes. The
    recipient search is a right-bisect on the globally offset cumulative
    array `cum`; `lastpos` redirects zero-minute entries.
    """
    n_pairs = q.shape[0]
    nrep = rep_end - rep_start
    out = np.zeros(nrep, dtype=np.float64)
    if nrep == 0 or n_pairs == 0:
        return out
    count_factor = (np.arange(n_pairs, dtype=np.uint64) * np.uint64(16) + np.uint64(1)) * _GOLD
    block = max(1, min(nrep, _BLOCK_BUDGET // n_pairs))
    flag64 = same_flag.astype(np.int64)
    pos = 0
    r = rep_start
    while r < rep_end:
        b = min(block, rep_end - r)
        keys = _replicate_keys(seed, r, r + b)
        u1 = _unit(_mix64(keys[:, None] + count_factor[None, :]))
        counts = _tech_counts(u1, q, exp_neg_lam, poisson)
        same_cnt = np.zeros(b, dtype=np.int64)
        diff_cnt = np.zeros(b, dtype=np.int64)
        kmax = int(counts.max()) if counts.size else 0
        for t in range(kmax):
            rows, cols = np.nonzero(counts > t)
            if rows.size == 0:
                break
            rec_factor = (cols.astype(np.uint64) * np.uint64(16) + np.uint64(2 + t)) * _GOLD
            u2 = _unit(_mix64(keys[rows] + rec_factor))
            target = u2 * total[cols] + base[cols]
            idx = np.searchsorted(cum, target, side="right")
            end_sel = slice_end[cols]
            idx = np.where(idx >= end_sel, end_sel - 1, idx)
            idx = lastpos[idx]
            fl = flag64[idx]
            np.add.at(same_cnt, rows, fl)
            np.add.at(diff_cnt, rows, 1 - fl)
        out[pos : pos + b] = diff_cnt / diff_per48 - same_cnt / same_per48
        pos += b
        r += b
    return out
