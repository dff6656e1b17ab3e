import io

import pytest

from refbias.analyses import HOME, StudySpec, run_study
from refbias.engine import SimConfig
from refbias.ingest import Decision, parse_l2m, write_l2m_csv
from refbias.race import build_exposures, career_call_rates, tech_rates
from refbias.rates import ViolationRates, count_decisions
from refbias.synth import (
    SynthSpec,
    default_synth_spec,
    generate,
    generate_race_null_fouls,
    power_curve,
    sample_spec_for_level,
)
from test_race import demo_of

from refbias.ingest import BoxScoreLine


def test_deterministic_replay():
    spec = default_synth_spec(n_games=40, seed=77)
    assert generate(spec).events == generate(spec).events
    assert generate(spec).events != generate(default_synth_spec(n_games=40, seed=78)).events


def test_mix_must_sum_to_one():
    with pytest.raises(ValueError, match="sum to 1"):
        SynthSpec(
            n_games=5,
            violation_mix={"a": 0.6, "b": 0.6},
            base_rates={
                "a": ViolationRates.from_boundaries("a", 0.1, 0.3),
                "b": ViolationRates.from_boundaries("b", 0.1, 0.3),
            },
        )


def test_mix_and_rates_must_align():
    with pytest.raises(ValueError, match="same types"):
        SynthSpec(
            n_games=5,
            violation_mix={"a": 1.0},
            base_rates={"b": ViolationRates.from_boundaries("b", 0.1, 0.3)},
        )


def test_infeasible_bias_shift_rejected():
    with pytest.raises(ValueError, match="infeasible"):
        SynthSpec(
            n_games=5,
            violation_mix={"a": 1.0},
            base_rates={"a": ViolationRates.from_boundaries("a", 0.04, 0.30)},
            injected_bias={"home": 0.05},  # p_ic = 0.04 < bias
        )
    with pytest.raises(ValueError, match="bias entity"):
        SynthSpec(
            n_games=5,
            violation_mix={"a": 1.0},
            base_rates={"a": ViolationRates.from_boundaries("a", 0.2, 0.5)},
            injected_bias={"lebron": 0.01},
        )


def test_generated_proportions_converge_to_boundaries():
    spec = default_synth_spec(n_games=6_500, events_mean=16.0, seed=5)  # ~104k events
    events = generate(spec).events
    assert len(events) > 90_000
    counts = count_decisions(events)
    for vt, rates in spec.base_rates.items():
        c = counts[vt]
        n = c.total
        b_ic, b_inc = rates.boundaries
        for observed, expected in (
            (c.ic / n, b_ic),
            (c.inc / n, b_inc - b_ic),
            (c.cc / n, 1.0 - b_inc),
        ):
            se = (expected * (1 - expected) / n) ** 0.5
            assert observed == pytest.approx(expected, abs=3 * se)


def test_zero_bias_event_fields_are_complete():
    events = generate(default_synth_spec(n_games=10, seed=1)).events
    for ev in events[:50]:
        assert ev.committing_side.value in ("home", "visiting")
        assert ev.committing_side is not ev.disadvantaged_side
        assert ev.committing_player and ev.disadvantaged_player
        assert ev.committing_team != ev.disadvantaged_team
        assert ev.decision in (
            Decision.CORRECT_CALL,
            Decision.INCORRECT_CALL,
            Decision.INCORRECT_NONCALL,
        )


def test_injected_home_bias_shifts_observed_gain():
    biased_spec = SynthSpec(
        n_games=400,
        violation_mix={"a": 1.0},
        base_rates={"a": ViolationRates.from_boundaries("a", 0.10, 0.30)},
        injected_bias={"home": 0.05},
        seed=9,
    )
    events = generate(biased_spec).events
    ((_, out),) = run_study(
        events,
        StudySpec(HOME, seasons=(2018, 2018)),
        SimConfig(replicates=300, master_seed=2),
    )
    # ~6,400 events, E[observed] ~ 2 * 0.05 * N = 640, null sd ~ sqrt(N * 0.35) ~ 47
    assert out.observed_wg > 300
    assert out.p_upper == pytest.approx(1 / 301)


def test_synthetic_csv_flows_through_real_ingestion():
    result = generate(default_synth_spec(n_games=25, seed=3))
    buf = io.StringIO()
    write_l2m_csv(result.events, buf)
    buf.seek(0)
    parsed, report = parse_l2m(buf)
    assert parsed == result.events
    assert report.skipped == 0


def test_sample_spec_for_level_round_trips_bias():
    template = default_synth_spec(n_games=10, seed=4)
    spec = sample_spec_for_level(template, 0.05)
    assert spec.injected_bias == {"home": 0.05}
    assert sample_spec_for_level(template, 0.0).injected_bias == {}


def test_power_curve_monotone_in_bias():
    # at this size the three levels span "near alpha" to "always detected"
    template = default_synth_spec(n_games=60, events_mean=16.0, seed=31)
    points = power_curve(
        template, [0.0, 0.02, 0.05], trials=30, sim_config=SimConfig(replicates=199)
    )
    rates = [p.detection_rate for p in points]
    slack = 2 * (0.25 / 30) ** 0.5  # 2 SE of a proportion over 30 trials
    assert rates[0] <= rates[1] + slack
    assert rates[1] <= rates[2] + slack
    assert rates[2] == 1.0


def test_power_curve_saturates_and_rejects_bad_trials():
    template = default_synth_spec(n_games=150, events_mean=12.0, seed=21)
    points = power_curve(template, [0.0, 0.06], trials=12, sim_config=SimConfig(replicates=199))
    assert points[0].detection_rate <= 0.25  # near the 5% level
    assert points[1].detection_rate == 1.0  # enormous effect at this size
    assert points[0].trials == 12
    with pytest.raises(ValueError):
        power_curve(template, [0.0], trials=0)


def test_race_null_generator_deterministic_and_plausible():
    demo = demo_of(
        {"w1": "white", "w2": "white", "b1": "black", "b2": "black"},
        {"r1": "white", "r2": "black"},
    )
    box = []
    officials = {}
    for g in range(30):
        game = f"g{g:03d}"
        box += [BoxScoreLine(game, p, 24.0) for p in ("w1", "w2", "b1", "b2")]
        officials[game] = ("r1", "r2")
    exposures = build_exposures(sorted(officials), box, demo, officials).exposures
    rates = {"r1": 0.5, "r2": 0.25}
    fouls_a = generate_race_null_fouls(exposures, rates, seed=11)
    fouls_b = generate_race_null_fouls(exposures, rates, seed=11)
    assert fouls_a == fouls_b
    # plausible volume: 30 games * (0.5 + 0.25) expected fouls
    assert 8 <= len(fouls_a) <= 40
    summary = tech_rates(exposures, fouls_a, demo)
    assert summary.n_fouls_used == len(fouls_a)
    estimated = career_call_rates(exposures, fouls_a, demo)
    assert estimated["r1"] == pytest.approx(0.5, abs=0.3)
