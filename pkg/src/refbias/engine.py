"""Monte Carlo null-model engine for net whistle gain.

Every replicate redraws the outcome of each ledger event from that
event's violation-type boundaries while holding the entity's role fixed,
then scores benefit minus detriment. Uniform draws come from a
counter-based stream keyed by (master seed, replicate, event), so the
null samples are byte-identical for any number of worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import SimulationError
from .ingest import Decision
from .rates import ViolationRates

_WHISTLE_STREAM = "whistle-gain"


class Role(Enum):
    COMMITTING = "committing"
    DISADVANTAGED = "disadvantaged"


@dataclass(frozen=True, slots=True)
class LedgerEvent:
    violation_type: str
    role: Role


@dataclass(frozen=True)
class EntityLedger:
    """The graded events attributed to one entity, with observed tallies.

    Benefit (beta) counts uncalled violations the entity committed plus
    incorrect calls against its opponent; detriment (delta) is the mirror
    image. Events where the entity has no resolvable role never enter.
    """

    entity: str
    events: tuple[LedgerEvent, ...]
    observed_beta: int
    observed_delta: int

    @property
    def n_events(self) -> int:
        return len(self.events)

    @classmethod
    def from_decisions(
        cls, entity: str, rows: Iterable[tuple[str, Role, Decision]]
    ) -> "EntityLedger":
        events = []
        beta = delta = 0
        for violation_type, role, decision in rows:
            if decision is Decision.CORRECT_NONCALL:
                continue
            events.append(LedgerEvent(violation_type, role))
            if decision is Decision.INCORRECT_NONCALL:
                if role is Role.COMMITTING:
                    beta += 1
                else:
                    delta += 1
            elif decision is Decision.INCORRECT_CALL:
                if role is Role.COMMITTING:
                    delta += 1
                else:
                    beta += 1
        return cls(entity, tuple(events), beta, delta)


@dataclass(frozen=True)
class SimConfig:
    """Replication settings; results depend only on these and the inputs."""

    replicates: int = 10_000
    master_seed: int = 0
    smoothing_weight: float = 0.0  # 0 = raw rates
    threads: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.smoothing_weight < 0:
            raise ValueError(f"smoothing weight must be >= 0, got {self.smoothing_weight}")


@dataclass(frozen=True)
class SimOutcome:
    observed_wg: int
    null_samples: np.ndarray
    null_mean: float
    p_upper: float
    p_lower: float
    excess: float
    share_gap_pct: float
    n_events: int


def observed_whistle_gain(ledger: EntityLedger) -> int:
    """Benefit minus detriment actually recorded for the entity."""
    return ledger.observed_beta - ledger.observed_delta


def simulate_event(rates: ViolationRates, u: float) -> Decision:
    """Resample one event outcome from a uniform draw in [0, 1).

    u < b_ic is an incorrect call, u < b_inc an incorrect non-call,
    anything else a correct call (half-open intervals).
    """
    bounds = rates.boundaries
    if bounds is None:
        raise SimulationError(
            f"undefined decision boundaries for violation type {rates.violation_type!r}"
        )
    b_ic, b_inc = bounds
    if u < b_ic:
        return Decision.INCORRECT_CALL
    if u < b_inc:
        return Decision.INCORRECT_NONCALL
    return Decision.CORRECT_CALL


def empirical_p_value(null_samples: Sequence[int] | np.ndarray, observed: float, tail: str) -> float:
    """Add-one tail estimate: (1 + #{at or beyond observed}) / (R + 1)."""
    samples = np.asarray(null_samples)
    if samples.size == 0:
        raise ValueError("null_samples must be non-empty")
    if tail == "upper":
        hits = int((samples >= observed).sum())
    elif tail == "lower":
        hits = int((samples <= observed).sum())
    else:
        raise ValueError(f"tail must be 'upper' or 'lower', got {tail!r}")
    return (1 + hits) / (samples.size + 1)


def share_gap_pct(excess: float, n_events: int) -> float:
    """Home-vs-visitor share gap in percentage points: 2 * excess / N * 100."""
    if n_events == 0:
        return 0.0
    return 2.0 * excess / n_events * 100.0


def _ledger_arrays(
    ledger: EntityLedger, rates_by_type: Mapping[str, ViolationRates]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cache: dict[str, tuple[float, float]] = {}
    b_ic = np.empty(ledger.n_events, dtype=np.float64)
    b_inc = np.empty(ledger.n_events, dtype=np.float64)
    sign = np.empty(ledger.n_events, dtype=np.int8)
    for i, ev in enumerate(ledger.events):
        bounds = cache.get(ev.violation_type)
        if bounds is None:
            rates = rates_by_type.get(ev.violation_type)
            if rates is None or rates.boundaries is None:
                raise SimulationError(
                    f"no usable rates for violation type {ev.violation_type!r}"
                )
            bounds = rates.boundaries
            cache[ev.violation_type] = bounds
        b_ic[i], b_inc[i] = bounds
        sign[i] = 1 if ev.role is Role.COMMITTING else -1
    return b_ic, b_inc, sign


def _null_samples(b_ic, b_inc, sign, seed: int, replicates: int, threads: int) -> np.ndarray:
    bounds = kernels.split_replicates(replicates, threads)
    if len(bounds) == 1:
        return kernels.whistle_null_samples(b_ic, b_inc, sign, seed, 0, replicates)
    with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
        parts = list(
            pool.map(
                lambda se: kernels.whistle_null_samples(b_ic, b_inc, sign, seed, se[0], se[1]),
                bounds,
            )
        )
    return np.concatenate(parts)


def run_simulation(
    ledger: EntityLedger,
    rates_by_type: Mapping[str, ViolationRates],
    config: SimConfig,
) -> SimOutcome:
    """Simulate the ledger under the null and score the observed gain.

    Output is identical for any thread count: replicate r's draws depend
    only on (master_seed, r, event index).
    """
    b_ic, b_inc, sign = _ledger_arrays(ledger, rates_by_type)
    seed = kernels.derive_seed(config.master_seed, _WHISTLE_STREAM)
    null = _null_samples(b_ic, b_inc, sign, seed, config.replicates, config.threads)
    observed = observed_whistle_gain(ledger)
    null_mean = float(null.mean())
    excess = observed - null_mean
    return SimOutcome(
        observed_wg=observed,
        null_samples=null,
        null_mean=null_mean,
        p_upper=empirical_p_value(null, observed, "upper"),
        p_lower=empirical_p_value(null, observed, "lower"),
        excess=excess,
        share_gap_pct=share_gap_pct(excess, ledger.n_events),
        n_events=ledger.n_events,
    )
