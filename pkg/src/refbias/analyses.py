"""Home-court, player, and team studies plus the multiple-testing meta-test.

Each study builds one ledger per entity, simulates it against rates
estimated from the same season window (players and teams use
leave-one-out rates so their own record cannot contaminate their null),
and reports empirical p-values. Every entity gets its own derived random
stream; the meta-test treats the per-entity tests as independent.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import exp, fsum, lgamma, log
from typing import Iterable, Sequence

from .engine import EntityLedger, Role, SimConfig, SimOutcome, run_simulation
from .ingest import Decision, GradedEvent, Side
from .kernels import derive_seed
from .rates import build_rate_table, leave_one_out_rates

HOME = "home"
PLAYER = "player"
TEAM = "team"
ENTITY_KINDS = (HOME, PLAYER, TEAM)

SEASON_TYPE_BOTH = "both"


@dataclass(frozen=True)
class StudySpec:
    entity_kind: str
    seasons: tuple[int, int] = (2015, 2022)
    season_type: str = SEASON_TYPE_BOTH  # "regular" | "playoffs" | "both"
    min_involvements: int = 100  # players only
    alpha: float = 0.05

    def __post_init__(self):
        if self.entity_kind not in ENTITY_KINDS:
            raise ValueError(f"entity_kind must be one of {ENTITY_KINDS}")
        if self.seasons[0] > self.seasons[1]:
            raise ValueError(f"empty season range {self.seasons}")
        if self.season_type not in ("regular", "playoffs", SEASON_TYPE_BOTH):
            raise ValueError(f"bad season_type {self.season_type!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class MetaTestResult:
    m_tests: int
    r_significant: int
    alpha: float
    p_all_false_positive: float


@dataclass(frozen=True)
class SignificanceSummary:
    positive: tuple[str, ...]
    negative: tuple[str, ...]
    positive_meta: MetaTestResult
    negative_meta: MetaTestResult


def filter_events(events: Iterable[GradedEvent], spec: StudySpec) -> list[GradedEvent]:
    """Season-window and season-type selection; correct non-calls drop out here."""
    lo, hi = spec.seasons
    return [
        ev
        for ev in events
        if ev.decision is not Decision.CORRECT_NONCALL
        and lo <= ev.season <= hi
        and (spec.season_type == SEASON_TYPE_BOTH or ev.season_type == spec.season_type)
    ]


def _home_rows(events: Iterable[GradedEvent]):
    for ev in events:
        if ev.committing_side is Side.HOME:
            yield ev.violation_type, Role.COMMITTING, ev.decision
        elif ev.disadvantaged_side is Side.HOME:
            yield ev.violation_type, Role.DISADVANTAGED, ev.decision


def build_ledgers(events: Iterable[GradedEvent], spec: StudySpec) -> list[EntityLedger]:
    """One ledger per qualifying entity (a single 'home' ledger for the
    home study). Events without a resolvable role are left out; player
    ledgers require min_involvements appearances."""
    events = filter_events(events, spec)
    if spec.entity_kind == HOME:
        ledger = EntityLedger.from_decisions(HOME, _home_rows(events))
        return [ledger] if ledger.n_events else []

    rows: dict[str, list] = {}
    for ev in events:
        if spec.entity_kind == PLAYER:
            committing, disadvantaged = ev.committing_player, ev.disadvantaged_player
        else:
            committing, disadvantaged = ev.committing_team, ev.disadvantaged_team
        if committing is not None and committing == disadvantaged:
            continue  # ambiguous role, unresolvable
        if committing is not None:
            rows.setdefault(committing, []).append((ev.violation_type, Role.COMMITTING, ev.decision))
        if disadvantaged is not None:
            rows.setdefault(disadvantaged, []).append(
                (ev.violation_type, Role.DISADVANTAGED, ev.decision)
            )
    ledgers = [EntityLedger.from_decisions(entity, items) for entity, items in sorted(rows.items())]
    if spec.entity_kind == PLAYER:
        ledgers = [led for led in ledgers if led.n_events >= spec.min_involvements]
    return ledgers


def run_study(
    events: Iterable[GradedEvent], spec: StudySpec, config: SimConfig
) -> list[tuple[str, SimOutcome]]:
    """Simulate every entity ledger; results sorted by p_upper ascending.

    Each entity's stream seed is derived from (master seed, kind, entity)
    so the per-entity tests are independent and insensitive to entity
    order or thread scheduling.
    """
    events = filter_events(events, spec)
    ledgers = build_ledgers(events, spec)
    shared_rates = None
    if spec.entity_kind == HOME:
        shared_rates = build_rate_table(events, config.smoothing_weight)
    results: list[tuple[str, SimOutcome]] = []
    for ledger in ledgers:
        if spec.entity_kind == HOME:
            table = shared_rates
        else:
            table = leave_one_out_rates(
                events, ledger.entity, spec.entity_kind, config.smoothing_weight
            ).rates
        entity_config = replace(
            config, master_seed=derive_seed(config.master_seed, f"{spec.entity_kind}:{ledger.entity}")
        )
        results.append((ledger.entity, run_simulation(ledger, table, entity_config)))
    results.sort(key=lambda item: (item[1].p_upper, item[0]))
    return results


def binomial_meta_test(m_tests: int, r_significant: int, alpha: float) -> float:
    """Probability that at least r of m independent level-alpha tests come
    up positive by chance alone: the exact binomial upper tail, summed in
    log domain for stability."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if m_tests < 0 or r_significant < 0 or r_significant > m_tests:
        raise ValueError(f"need 0 <= r <= m, got r={r_significant}, m={m_tests}")
    if r_significant == 0:
        return 1.0
    log_alpha = log(alpha)
    log_beta = log(1.0 - alpha)
    lgm = lgamma(m_tests + 1)
    terms = [
        exp(
            lgm
            - lgamma(k + 1)
            - lgamma(m_tests - k + 1)
            + k * log_alpha
            + (m_tests - k) * log_beta
        )
        for k in range(r_significant, m_tests + 1)
    ]
    return min(1.0, fsum(terms))


def classify_significance(
    outcomes: Sequence[tuple[str, SimOutcome]], alpha: float
) -> SignificanceSummary:
    """Split entities into positive/negative significant sets and run the
    meta-test per direction (positive: p_upper <= alpha; negative:
    p_lower <= alpha)."""
    if not outcomes:
        raise ValueError("outcomes must be non-empty")
    p_up = {entity: outcome.p_upper for entity, outcome in outcomes}
    p_lo = {entity: outcome.p_lower for entity, outcome in outcomes}
    positive = sorted((e for e in p_up if p_up[e] <= alpha), key=lambda e: (p_up[e], e))
    negative = sorted((e for e in p_lo if p_lo[e] <= alpha), key=lambda e: (p_lo[e], e))
    m = len(outcomes)
    return SignificanceSummary(
        positive=tuple(positive),
        negative=tuple(negative),
        positive_meta=MetaTestResult(m, len(positive), alpha, binomial_meta_test(m, len(positive), alpha)),
        negative_meta=MetaTestResult(m, len(negative), alpha, binomial_meta_test(m, len(negative), alpha)),
    )
