"""Referee-player race audit on personal technical fouls.

Compares the technical-foul rate per 48 shared player-minutes between
same-race and different-race referee-player pairs, then tests the gap
against a two-step simulated null: per (referee, game), first decide
whether a simulated technical occurs from the referee's career call
rate, then pick the recipient with probability proportional to playing
time.

The whole audit lives in one universe: players and referees of known
race (white or black). Exposures, foul classification, career rates, and
simulated recipients all apply the same restriction, which keeps the
null generator aligned with the detector and makes race-label-swap
symmetry exact.
"""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .engine import SimConfig, empirical_p_value
from .errors import DataGapError, DegenerateNullError, SimulationError
from .ingest import RACE_BLACK, RACE_WHITE, BoxScoreLine, Demographics, TechFoulEvent

_RACE_STREAM = "race-audit"
_AUDIT_RACES = (RACE_WHITE, RACE_BLACK)

# Each referee-game pair owns one 4096-wide band of the recipient-search
# axis; a game roster's total minutes must stay below the band width.
_PAIR_OFFSET = 4096.0

MODELS = ("bernoulli", "poisson")


@dataclass(frozen=True, slots=True)
class RosterEntry:
    player: str
    minutes: float
    race: str


@dataclass(frozen=True)
class RefGameExposure:
    """Shared court time between one referee and one game's roster."""

    referee: str
    game_id: str
    referee_race: str
    same_race_minutes: float
    diff_race_minutes: float
    roster: tuple[RosterEntry, ...]


@dataclass(frozen=True)
class ExposureBuildResult:
    exposures: list[RefGameExposure]
    dropped_games: list[str]
    n_games_total: int

    @property
    def dropped_fraction(self) -> float:
        return len(self.dropped_games) / self.n_games_total if self.n_games_total else 0.0


@dataclass(frozen=True)
class TechRateSummary:
    tau_same: float
    tau_diff: float
    delta_tau: float
    n_fouls_used: int
    n_fouls_excluded: int
    same_exposure_minutes: float
    diff_exposure_minutes: float


@dataclass(frozen=True)
class RaceNullResult:
    observed_delta: float
    null_samples: np.ndarray
    p_value: float
    model: str


def build_exposures(
    games: Iterable[str],
    box_scores: Iterable[BoxScoreLine],
    demographics: Demographics,
    officials_per_game: Mapping[str, Sequence[str]],
) -> ExposureBuildResult:
    """One exposure per (referee, retained game).

    Games missing any referee's demographics (or with no known-race
    players) are dropped and counted; a retained game without box-score
    lines is a hard data gap.
    """
    by_game: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
    for line in box_scores:
        by_game[line.game_id][line.player] += line.minutes

    exposures: list[RefGameExposure] = []
    dropped: list[str] = []
    missing_box: list[str] = []
    game_list = sorted(set(games))
    for game in game_list:
        referees = officials_per_game.get(game, ())
        races = [demographics.referee_race(ref) for ref in referees]
        if not referees or any(race not in _AUDIT_RACES for race in races):
            dropped.append(game)
            continue
        minutes_by_player = by_game.get(game)
        if not minutes_by_player:
            missing_box.append(game)
            continue
        roster = tuple(
            RosterEntry(player, minutes, demographics.player_race(player))
            for player, minutes in sorted(minutes_by_player.items())
            if demographics.player_race(player) in _AUDIT_RACES
        )
        if not roster or sum(entry.minutes for entry in roster) <= 0:
            dropped.append(game)
            continue
        for referee, race in zip(referees, races):
            same = sum(e.minutes for e in roster if e.race == race)
            diff = sum(e.minutes for e in roster if e.race != race)
            exposures.append(RefGameExposure(referee, game, race, same, diff, roster))
    if missing_box:
        raise DataGapError(
            f"box scores missing for {len(missing_box)} retained game(s)", missing_box
        )
    return ExposureBuildResult(exposures, dropped, len(game_list))


def _classified_fouls(
    exposures: Sequence[RefGameExposure],
    tech_fouls: Iterable[TechFoulEvent],
    demographics: Demographics,
):
    """Yield (exposure, same_race: bool) per usable foul, counting the rest."""
    retained = {(e.referee, e.game_id): e for e in exposures}
    excluded = 0
    usable = []
    for foul in tech_fouls:
        exposure = retained.get((foul.referee, foul.game_id))
        if exposure is None:
            excluded += 1
            continue
        player_race = demographics.player_race(foul.player)
        if player_race not in _AUDIT_RACES:
            excluded += 1
            continue
        usable.append((exposure, player_race == exposure.referee_race))
    return usable, excluded


def tech_rates(
    exposures: Sequence[RefGameExposure],
    tech_fouls: Iterable[TechFoulEvent],
    demographics: Demographics,
) -> TechRateSummary:
    """Pooled same-race and different-race foul rates per 48 player-minutes."""
    usable, excluded = _classified_fouls(exposures, tech_fouls, demographics)
    n_same = sum(1 for _, same in usable if same)
    n_diff = len(usable) - n_same
    same_minutes = sum(e.same_race_minutes for e in exposures)
    diff_minutes = sum(e.diff_race_minutes for e in exposures)

    def rate(count: int, minutes: float, bucket: str) -> float:
        if minutes <= 0:
            if count:
                raise SimulationError(
                    f"{count} {bucket}-race fouls but zero {bucket}-race exposure; "
                    "input data are inconsistent"
                )
            return 0.0
        return count / (minutes / 48.0)

    tau_same = rate(n_same, same_minutes, "same")
    tau_diff = rate(n_diff, diff_minutes, "diff")
    return TechRateSummary(
        tau_same=tau_same,
        tau_diff=tau_diff,
        delta_tau=tau_diff - tau_same,
        n_fouls_used=len(usable),
        n_fouls_excluded=excluded,
        same_exposure_minutes=same_minutes,
        diff_exposure_minutes=diff_minutes,
    )


def career_call_rates(
    exposures: Sequence[RefGameExposure],
    tech_fouls: Iterable[TechFoulEvent],
    demographics: Demographics,
) -> dict[str, float]:
    """Per-referee technical fouls per retained game (unclamped)."""
    games_per_ref: dict[str, int] = defaultdict(int)
    for exposure in exposures:
        games_per_ref[exposure.referee] += 1
    usable, _ = _classified_fouls(exposures, tech_fouls, demographics)
    fouls_per_ref: dict[str, int] = defaultdict(int)
    for exposure, _same in usable:
        fouls_per_ref[exposure.referee] += 1
    return {ref: fouls_per_ref[ref] / n for ref, n in games_per_ref.items()}


def _ordered(exposures: Sequence[RefGameExposure]) -> list[RefGameExposure]:
    # Canonical pair order: counter indices must not depend on input order.
    return sorted(exposures, key=lambda e: (e.referee, e.game_id))


def _sim_arrays(exposures: Sequence[RefGameExposure], rate_by_referee: Mapping[str, float], model: str):
    ordered = _ordered(exposures)
    n_pairs = len(ordered)
    q = np.empty(n_pairs, dtype=np.float64)
    total = np.empty(n_pairs, dtype=np.float64)
    base = np.empty(n_pairs, dtype=np.float64)
    slice_end = np.empty(n_pairs, dtype=np.int64)
    cum_parts: list[np.ndarray] = []
    flags: list[np.ndarray] = []
    lastpos_parts: list[np.ndarray] = []
    offset = 0
    for p, exposure in enumerate(ordered):
        rate = rate_by_referee.get(exposure.referee)
        if rate is None or rate < 0:
            raise SimulationError(f"no call rate for referee {exposure.referee!r}")
        q[p] = min(rate, 1.0) if model == "bernoulli" else rate
        minutes = np.array([entry.minutes for entry in exposure.roster], dtype=np.float64)
        if minutes.size == 0 or minutes.sum() <= 0:
            raise SimulationError(f"empty roster for game {exposure.game_id!r}")
        local_cum = np.cumsum(minutes)
        if local_cum[-1] >= _PAIR_OFFSET:
            raise SimulationError(
                f"game {exposure.game_id!r} roster minutes {local_cum[-1]:.1f} exceed "
                f"the {_PAIR_OFFSET:.0f}-minute band"
            )
        total[p] = local_cum[-1]
        base[p] = _PAIR_OFFSET * p
        cum_parts.append(local_cum + base[p])
        flags.append(
            np.array(
                [1 if entry.race == exposure.referee_race else 0 for entry in exposure.roster],
                dtype=np.int8,
            )
        )
        last = np.empty(minutes.size, dtype=np.int64)
        prev = offset  # zero-width entries redirect to the last positive one
        for j, m in enumerate(minutes):
            if m > 0:
                prev = offset + j
            last[j] = prev
        lastpos_parts.append(last)
        offset += minutes.size
        slice_end[p] = offset
    cum = np.concatenate(cum_parts) if cum_parts else np.empty(0)
    same_flag = np.concatenate(flags) if flags else np.empty(0, dtype=np.int8)
    lastpos = np.concatenate(lastpos_parts) if lastpos_parts else np.empty(0, dtype=np.int64)
    exp_neg_lam = np.exp(-q) if model == "poisson" else np.ones_like(q)
    return q, exp_neg_lam, base, total, cum, slice_end, lastpos, same_flag


def simulate_race_null(
    exposures: Sequence[RefGameExposure],
    rate_by_referee: Mapping[str, float],
    observed_delta: float,
    config: SimConfig,
    model: str = "bernoulli",
) -> RaceNullResult:
    """Simulate the foul-rate gap under no-bias and place the observed gap.

    The default model draws at most one simulated technical per
    (referee, game) — a literal binary decision; the poisson model is a
    sensitivity knob allowing several per game at the same career rate.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    same_minutes = sum(e.same_race_minutes for e in exposures)
    diff_minutes = sum(e.diff_race_minutes for e in exposures)
    if same_minutes <= 0 or diff_minutes <= 0:
        raise DegenerateNullError(
            "degenerate null: every rostered player shares (or differs from) the "
            f"referee race in all games (same={same_minutes:.1f} min, "
            f"diff={diff_minutes:.1f} min); the rate gap is undefined"
        )
    q, exp_neg_lam, base, total, cum, slice_end, lastpos, same_flag = _sim_arrays(
        exposures, rate_by_referee, model
    )
    same_per48 = same_minutes / 48.0
    diff_per48 = diff_minutes / 48.0
    seed = kernels.derive_seed(config.master_seed, _RACE_STREAM)

    def run_chunk(bounds: tuple[int, int]) -> np.ndarray:
        return kernels.race_null_samples(
            q,
            exp_neg_lam,
            model == "poisson",
            base,
            total,
            cum,
            slice_end,
            lastpos,
            same_flag,
            same_per48,
            diff_per48,
            seed,
            bounds[0],
            bounds[1],
        )

    bounds = kernels.split_replicates(config.replicates, config.threads)
    if len(bounds) == 1:
        null = run_chunk(bounds[0])
    else:
        with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
            null = np.concatenate(list(pool.map(run_chunk, bounds)))
    return RaceNullResult(
        observed_delta=observed_delta,
        null_samples=null,
        p_value=empirical_p_value(null, observed_delta, "upper"),
        model=model,
    )
