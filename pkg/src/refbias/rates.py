"""Per-violation-type call-accuracy estimates.

Precision = CC/(CC+IC), recall = CC/(CC+INC); both are None (never a
silent 0 or 1) when their denominator is empty. The simulation boundaries
partition [0,1) into incorrect-call / incorrect-non-call / correct-call
regions: b_ic = IC/total, b_inc = (IC+INC)/total. Correct-non-call rows
never enter any tally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .ingest import Decision, GradedEvent


@dataclass(frozen=True, slots=True)
class ViolationCounts:
    violation_type: str
    cc: int = 0
    ic: int = 0
    inc: int = 0

    @property
    def total(self) -> int:
        return self.cc + self.ic + self.inc


@dataclass(frozen=True, slots=True)
class ViolationRates:
    violation_type: str
    precision: float | None
    recall: float | None
    b_ic: float | None
    b_inc: float | None
    n_events: int

    @property
    def boundaries(self) -> tuple[float, float] | None:
        if self.b_ic is None or self.b_inc is None:
            return None
        return (self.b_ic, self.b_inc)

    @classmethod
    def from_boundaries(cls, violation_type: str, b_ic: float, b_inc: float) -> "ViolationRates":
        """Rates object carrying only simulation boundaries (synthetic specs)."""
        if not 0.0 <= b_ic <= b_inc <= 1.0:
            raise ValueError(f"invalid boundaries ({b_ic}, {b_inc})")
        return cls(violation_type, None, None, b_ic, b_inc, 0)


def count_decisions(events: Iterable[GradedEvent]) -> dict[str, ViolationCounts]:
    """Tally CC/IC/INC per violation type, ignoring correct non-calls."""
    tallies: dict[str, list[int]] = {}
    for ev in events:
        if ev.decision is Decision.CORRECT_NONCALL:
            continue
        row = tallies.setdefault(ev.violation_type, [0, 0, 0])
        if ev.decision is Decision.CORRECT_CALL:
            row[0] += 1
        elif ev.decision is Decision.INCORRECT_CALL:
            row[1] += 1
        else:
            row[2] += 1
    return {
        vt: ViolationCounts(vt, cc=row[0], ic=row[1], inc=row[2])
        for vt, row in tallies.items()
    }


def rates_from_counts(counts: ViolationCounts) -> ViolationRates:
    total = counts.total
    return ViolationRates(
        violation_type=counts.violation_type,
        precision=counts.cc / (counts.cc + counts.ic) if counts.cc + counts.ic > 0 else None,
        recall=counts.cc / (counts.cc + counts.inc) if counts.cc + counts.inc > 0 else None,
        b_ic=counts.ic / total if total > 0 else None,
        b_inc=(counts.ic + counts.inc) / total if total > 0 else None,
        n_events=total,
    )


def compute_rates(events: Iterable[GradedEvent]) -> dict[str, ViolationRates]:
    """One ViolationRates entry per violation type present (non-CNC)."""
    return {vt: rates_from_counts(c) for vt, c in count_decisions(events).items()}


def aggregate_counts(counts: Iterable[ViolationCounts]) -> ViolationCounts:
    """Pool counts across types; the smoothing prior."""
    cc = ic = inc = 0
    for c in counts:
        cc += c.cc
        ic += c.ic
        inc += c.inc
    return ViolationCounts("__pooled__", cc=cc, ic=ic, inc=inc)


def smoothed_rates(
    counts: ViolationCounts, prior: ViolationCounts, weight: float
) -> ViolationRates:
    """Shrink one type's boundaries toward the pooled proportions.

    Each boundary numerator gains `weight` pseudo-events split by the
    pooled IC/INC/CC proportions; the denominator gains `weight`. At
    weight 0 this reproduces the raw rates exactly; as weight grows the
    boundaries converge to the pooled proportions. Precision and recall
    are reported raw (smoothing exists for the simulation boundaries).
    """
    if weight < 0:
        raise ValueError(f"smoothing weight must be >= 0, got {weight}")
    raw = rates_from_counts(counts)
    if weight == 0:
        return raw
    if prior.total <= 0:
        raise ValueError("smoothing requires a non-empty prior")
    p_ic = prior.ic / prior.total
    p_inc = prior.inc / prior.total
    denom = counts.total + weight
    return ViolationRates(
        violation_type=counts.violation_type,
        precision=raw.precision,
        recall=raw.recall,
        b_ic=(counts.ic + weight * p_ic) / denom,
        b_inc=(counts.ic + counts.inc + weight * (p_ic + p_inc)) / denom,
        n_events=counts.total,
    )


@dataclass(frozen=True)
class LeaveOneOutRates:
    """Rates with one entity's events removed.

    `rates` always holds an entry for every violation type present in the
    full input; types whose leave-one-out tally is empty fall back to the
    global rates and are listed in `fallback_types`.
    """

    rates: dict[str, ViolationRates]
    fallback_types: frozenset[str]


def involves(event: GradedEvent, entity: str, entity_kind: str) -> bool:
    """Whether the entity appears as committing or disadvantaged party."""
    if entity_kind == "player":
        return entity in (event.committing_player, event.disadvantaged_player)
    if entity_kind == "team":
        return entity in (event.committing_team, event.disadvantaged_team)
    raise ValueError(f"unknown entity kind {entity_kind!r}")


def leave_one_out_rates(
    events: Iterable[GradedEvent],
    excluded_entity: str,
    entity_kind: str,
    smoothing_weight: float = 0.0,
) -> LeaveOneOutRates:
    """Rates over the events not involving `excluded_entity`, so an
    entity's own record cannot contaminate its null model."""
    events = list(events)
    full_counts = count_decisions(events)
    loo_counts = count_decisions(
        ev for ev in events if not involves(ev, excluded_entity, entity_kind)
    )
    prior = aggregate_counts(loo_counts.values())
    rates: dict[str, ViolationRates] = {}
    fallback: set[str] = set()
    for vt, full in full_counts.items():
        counts = loo_counts.get(vt)
        if counts is None or counts.total == 0:
            fallback.add(vt)
            counts = full
        if smoothing_weight > 0:
            rates[vt] = smoothed_rates(counts, prior if prior.total > 0 else counts, smoothing_weight)
        else:
            rates[vt] = rates_from_counts(counts)
    return LeaveOneOutRates(rates=rates, fallback_types=frozenset(fallback))


def build_rate_table(
    events: Iterable[GradedEvent], smoothing_weight: float = 0.0
) -> dict[str, ViolationRates]:
    """Rates per type, optionally smoothed toward the pooled proportions."""
    counts = count_decisions(events)
    if smoothing_weight <= 0:
        return {vt: rates_from_counts(c) for vt, c in counts.items()}
    prior = aggregate_counts(counts.values())
    return {vt: smoothed_rates(c, prior, smoothing_weight) for vt, c in counts.items()}
