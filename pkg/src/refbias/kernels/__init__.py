"""Hot simulation kernels with backend selection at import.

The compiled Cython core is preferred; the numpy implementation is the
fallback and the reference the compiled core is tested against. Both
produce bit-identical output. Set REFBIAS_PURE_PYTHON=1 to force the
fallback (used by the benchmark and the cross-backend tests).
"""

from __future__ import annotations

import os

from . import _pykernels
from ._splitmix import derive_seed, fnv1a64, mix64, uniform_at

if os.environ.get("REFBIAS_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

BACKEND: str = _impl.BACKEND
whistle_null_samples = _impl.whistle_null_samples
race_null_samples = _impl.race_null_samples

# Replay helper for tests and debugging; not performance sensitive.
event_uniforms = _pykernels.event_uniforms


def split_replicates(replicates: int, threads: int) -> list[tuple[int, int]]:
    """Contiguous replicate ranges for worker threads.

    Results never depend on the split: each replicate's draws are a pure
    function of (seed, replicate index).
    """
    parts = max(1, min(threads, replicates))
    step, extra = divmod(replicates, parts)
    bounds = []
    start = 0
    for i in range(parts):
        end = start + step + (1 if i < extra else 0)
        bounds.append((start, end))
        start = end
    return bounds

__all__ = [
    "BACKEND",
    "derive_seed",
    "event_uniforms",
    "fnv1a64",
    "mix64",
    "race_null_samples",
    "split_replicates",
    "uniform_at",
    "whistle_null_samples",
]
