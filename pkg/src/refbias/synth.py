"""Synthetic ledgers with known injected bias, for calibration and power.

Events are drawn from the same boundary model the detector assumes; a
biased side has probability mass moved from its detrimental outcome to
its beneficial one (committing: incorrect call -> incorrect non-call;
disadvantaged: the reverse) while the event count stays fixed. With zero
bias the generator IS the detector's null, so p-values must calibrate.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .analyses import HOME, StudySpec, run_study
from .engine import SimConfig
from .ingest import Decision, GradedEvent, Side, TechFoulEvent
from .kernels import derive_seed
from .race import RefGameExposure
from .rates import ViolationRates

_SIDES = ("home", "visiting")


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic ledger.

    events_per_game_dispersion = 0 draws Poisson counts; > 0 uses a
    negative binomial with variance mean + dispersion * mean**2.
    injected_bias maps a side ("home"/"visiting") to the probability
    shift toward its beneficial outcomes.
    """

    n_games: int
    violation_mix: Mapping[str, float]
    base_rates: Mapping[str, ViolationRates]
    events_per_game_mean: float = 16.0
    events_per_game_dispersion: float = 0.0
    injected_bias: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0
    season: int = 2018
    season_type: str = "regular"
    n_teams: int = 8
    players_per_team: int = 6

    def __post_init__(self):
        if self.n_games < 1:
            raise ValueError("n_games must be >= 1")
        if abs(sum(self.violation_mix.values()) - 1.0) > 1e-9:
            raise ValueError("violation_mix must sum to 1")
        if set(self.violation_mix) != set(self.base_rates):
            raise ValueError("violation_mix and base_rates must cover the same types")
        for entity in self.injected_bias:
            if entity not in _SIDES:
                raise ValueError(f"bias entity must be one of {_SIDES}, got {entity!r}")
        budget = sum(abs(b) for b in self.injected_bias.values())
        for vt, rates in self.base_rates.items():
            bounds = rates.boundaries
            if bounds is None:
                raise ValueError(f"base rates for {vt!r} lack boundaries")
            p_ic = bounds[0]
            p_inc = bounds[1] - bounds[0]
            if budget >= min(p_ic, p_inc) and budget > 0:
                raise ValueError(
                    f"bias {budget} infeasible for {vt!r}: needs < min(p_ic={p_ic}, p_inc={p_inc})"
                )


@dataclass(frozen=True)
class SynthResult:
    events: list[GradedEvent]
    injected_bias: Mapping[str, float]
    spec: SynthSpec


@dataclass(frozen=True)
class PowerPoint:
    bias: float
    detection_rate: float
    trials: int


# (mix share, b_ic, b_inc) per type; min widths leave room for |bias| < 0.08
_DEFAULT_TYPE_PROFILES = {
    "foul:personal": (0.45, 0.08, 0.28),
    "foul:shooting": (0.25, 0.10, 0.30),
    "turnover:traveling": (0.15, 0.12, 0.60),
    "violation:kicked ball": (0.15, 0.09, 0.25),
}


def default_synth_spec(
    n_games: int,
    events_mean: float = 16.0,
    dispersion: float = 0.0,
    seed: int = 0,
) -> SynthSpec:
    """Stock four-type recipe used by the power CLI and the test suite."""
    return SynthSpec(
        n_games=n_games,
        violation_mix={vt: prof[0] for vt, prof in _DEFAULT_TYPE_PROFILES.items()},
        base_rates={
            vt: ViolationRates.from_boundaries(vt, prof[1], prof[2])
            for vt, prof in _DEFAULT_TYPE_PROFILES.items()
        },
        events_per_game_mean=events_mean,
        events_per_game_dispersion=dispersion,
        seed=seed,
    )


def sample_spec_for_level(template: SynthSpec, bias: float) -> SynthSpec:
    """A representative dataset spec for one bias level (for CSV emission)."""
    return replace(
        template,
        injected_bias={"home": bias} if bias else {},
        seed=derive_seed(template.seed, f"emit:{bias:g}"),
    )


def _event_counts(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    mean = spec.events_per_game_mean
    disp = spec.events_per_game_dispersion
    if disp <= 0:
        return rng.poisson(mean, spec.n_games)
    r = 1.0 / disp
    p = r / (r + mean)
    return rng.negative_binomial(r, p, spec.n_games)


def generate(spec: SynthSpec) -> SynthResult:
    """Draw a full synthetic ledger; identical spec + seed replays identically."""
    rng = np.random.default_rng(spec.seed)
    types = sorted(spec.violation_mix)
    mix = np.array([spec.violation_mix[t] for t in types])
    p_ic = np.array([spec.base_rates[t].boundaries[0] for t in types])
    p_inc = np.array(
        [spec.base_rates[t].boundaries[1] - spec.base_rates[t].boundaries[0] for t in types]
    )

    counts = _event_counts(spec, rng)
    n_total = int(counts.sum())
    game_idx = np.repeat(np.arange(spec.n_games), counts)

    home_team = rng.integers(0, spec.n_teams, spec.n_games)
    away_shift = rng.integers(1, spec.n_teams, spec.n_games)
    away_team = (home_team + away_shift) % spec.n_teams

    type_idx = rng.choice(len(types), size=n_total, p=mix)
    home_commits = rng.random(n_total) < 0.5
    committer_slot = rng.integers(0, spec.players_per_team, n_total)
    victim_slot = rng.integers(0, spec.players_per_team, n_total)
    u = rng.random(n_total)

    bias_home = float(spec.injected_bias.get("home", 0.0))
    bias_vis = float(spec.injected_bias.get("visiting", 0.0))
    b_commit = np.where(home_commits, bias_home, bias_vis)
    b_victim = np.where(home_commits, bias_vis, bias_home)
    t_ic = p_ic[type_idx] - b_commit + b_victim
    t_inc = t_ic + p_inc[type_idx] + b_commit - b_victim

    team_name = [f"team{t:02d}" for t in range(spec.n_teams)]
    rosters = [
        [f"player-{t:02d}-{j}" for j in range(spec.players_per_team)]
        for t in range(spec.n_teams)
    ]

    events: list[GradedEvent] = []
    for i in range(n_total):
        g = game_idx[i]
        if u[i] < t_ic[i]:
            decision = Decision.INCORRECT_CALL
        elif u[i] < t_inc[i]:
            decision = Decision.INCORRECT_NONCALL
        else:
            decision = Decision.CORRECT_CALL
        if home_commits[i]:
            commit_team, victim_team = int(home_team[g]), int(away_team[g])
            commit_side, victim_side = Side.HOME, Side.VISITING
        else:
            commit_team, victim_team = int(away_team[g]), int(home_team[g])
            commit_side, victim_side = Side.VISITING, Side.HOME
        events.append(
            GradedEvent(
                game_id=f"synth-{g:05d}",
                season=spec.season,
                season_type=spec.season_type,
                violation_type=types[type_idx[i]],
                decision=decision,
                committing_side=commit_side,
                disadvantaged_side=victim_side,
                committing_player=rosters[commit_team][committer_slot[i]],
                disadvantaged_player=rosters[victim_team][victim_slot[i]],
                committing_team=team_name[commit_team],
                disadvantaged_team=team_name[victim_team],
            )
        )
    return SynthResult(events=events, injected_bias=dict(spec.injected_bias), spec=spec)


def generate_race_null_fouls(
    exposures: Sequence[RefGameExposure],
    rate_by_referee: Mapping[str, float],
    seed: int,
    model: str = "bernoulli",
) -> list[TechFoulEvent]:
    """Draw technical fouls from the race audit's own two-step null.

    Used for calibration: feeding these fouls back into the audit must
    produce approximately uniform p-values.
    """
    rng = np.random.default_rng(seed)
    fouls: list[TechFoulEvent] = []
    for exposure in sorted(exposures, key=lambda e: (e.referee, e.game_id)):
        rate = rate_by_referee[exposure.referee]
        if model == "poisson":
            n = int(rng.poisson(rate))
        else:
            n = int(rng.random() < min(rate, 1.0))
        if n == 0:
            continue
        minutes = np.array([entry.minutes for entry in exposure.roster])
        probs = minutes / minutes.sum()
        for pick in rng.choice(len(probs), size=n, p=probs):
            fouls.append(
                TechFoulEvent(exposure.game_id, exposure.referee, exposure.roster[pick].player)
            )
    return fouls


def power_curve(
    spec_template: SynthSpec,
    bias_levels: Sequence[float],
    trials: int,
    alpha: float = 0.05,
    sim_config: SimConfig | None = None,
) -> list[PowerPoint]:
    """Detection rate of the home study per injected bias level."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sim_config = sim_config or SimConfig(replicates=999)
    study = StudySpec(
        HOME, seasons=(spec_template.season, spec_template.season), season_type="both", alpha=alpha
    )
    points = []
    for level_idx, bias in enumerate(bias_levels):
        detected = 0
        level_seed = derive_seed(spec_template.seed, f"power-level:{level_idx}")
        for trial in range(trials):
            trial_seed = derive_seed(level_seed, f"trial:{trial}")
            spec = replace(spec_template, injected_bias={"home": bias}, seed=trial_seed)
            events = generate(spec).events
            config = replace(sim_config, master_seed=derive_seed(trial_seed, "sim"))
            outcomes = run_study(events, study, config)
            if outcomes and outcomes[0][1].p_upper <= alpha:
                detected += 1
        points.append(PowerPoint(bias=bias, detection_rate=detected / trials, trials=trials))
    return points
