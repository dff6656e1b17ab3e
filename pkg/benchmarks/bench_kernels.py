"""Benchmark the compiled kernels against the numpy fallback.

Sizes mirror the full-data home study (about 19k ledger events, 10k
replicates) and the race audit (about 30k referee-game pairs). Both
backends produce bit-identical output; this script reports the speed
difference.

Run: python benchmarks/bench_kernels.py [--replicates N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from refbias.kernels import _pykernels

try:
    from refbias.kernels import _ckernels
except ImportError:
    _ckernels = None


def _whistle_inputs(n_events: int):
    rng = np.random.default_rng(1)
    b_ic = rng.uniform(0.0, 0.15, n_events)
    b_inc = b_ic + rng.uniform(0.05, 0.4, n_events)
    sign = rng.choice(np.array([-1, 1], dtype=np.int8), n_events)
    return b_ic, b_inc, sign


def _race_inputs(n_pairs: int, roster_size: int = 10):
    rng = np.random.default_rng(2)
    q = rng.uniform(0.1, 0.3, n_pairs)
    base = np.arange(n_pairs, dtype=np.float64) * 4096.0
    minutes = rng.uniform(5.0, 40.0, (n_pairs, roster_size))
    local = np.cumsum(minutes, axis=1)
    total = local[:, -1].copy()
    cum = (local + base[:, None]).ravel()
    slice_end = (np.arange(n_pairs, dtype=np.int64) + 1) * roster_size
    lastpos = np.arange(n_pairs * roster_size, dtype=np.int64)
    flag = rng.integers(0, 2, n_pairs * roster_size).astype(np.int8)
    return (q, np.exp(-q), False, base, total, cum, slice_end, lastpos, flag, 3000.0, 2800.0)


def _time(fn, *args) -> tuple[float, np.ndarray]:
    fn(*args)  # warm up
    start = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - start, out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicates", type=int, default=2_000)
    parser.add_argument("--events", type=int, default=19_311)
    parser.add_argument("--pairs", type=int, default=30_000)
    args = parser.parse_args()

    n_rep = args.replicates
    print(f"whistle kernel: {args.events} events x {n_rep} replicates")
    w_args = _whistle_inputs(args.events)
    py_t, py_out = _time(_pykernels.whistle_null_samples, *w_args, 42, 0, n_rep)
    rate = args.events * n_rep / py_t / 1e6
    print(f"  python  {py_t:8.3f}s  ({rate:7.1f} M event-sims/s)")
    if _ckernels is not None:
        cy_t, cy_out = _time(_ckernels.whistle_null_samples, *w_args, 42, 0, n_rep)
        rate = args.events * n_rep / cy_t / 1e6
        print(f"  cython  {cy_t:8.3f}s  ({rate:7.1f} M event-sims/s)  {py_t / cy_t:5.1f}x")
        assert np.array_equal(py_out, cy_out), "backends disagree"

    race_rep = max(1, n_rep // 4)
    print(f"race kernel: {args.pairs} referee-game pairs x {race_rep} replicates")
    r_args = _race_inputs(args.pairs)
    py_t, py_out = _time(_pykernels.race_null_samples, *r_args, 43, 0, race_rep)
    rate = args.pairs * race_rep / py_t / 1e6
    print(f"  python  {py_t:8.3f}s  ({rate:7.1f} M pair-sims/s)")
    if _ckernels is not None:
        cy_t, cy_out = _time(_ckernels.race_null_samples, *r_args, 43, 0, race_rep)
        rate = args.pairs * race_rep / cy_t / 1e6
        print(f"  cython  {cy_t:8.3f}s  ({rate:7.1f} M pair-sims/s)  {py_t / cy_t:5.1f}x")
        assert np.array_equal(py_out, cy_out), "backends disagree"
    if _ckernels is None:
        print("compiled backend not built; install without REFBIAS_SKIP_EXT to compare")


if __name__ == "__main__":
    main()
