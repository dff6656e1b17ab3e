import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from conftest import make_event
from refbias.analyses import (
    HOME,
    PLAYER,
    TEAM,
    MetaTestResult,
    StudySpec,
    binomial_meta_test,
    build_ledgers,
    classify_significance,
    filter_events,
    run_study,
)
from refbias.engine import SimConfig, SimOutcome
from refbias.ingest import Decision, Side


def outcome(p_upper=0.5, p_lower=0.5):
    return SimOutcome(0, np.zeros(1, dtype=np.int64), 0.0, p_upper, p_lower, 0.0, 0.0, 10)


# --- meta-test ----------------------------------------------------------------


def exact_binomial_tail(m, r, alpha: Fraction) -> float:
    total = sum(
        math.comb(m, k) * alpha**k * (1 - alpha) ** (m - k) for k in range(r, m + 1)
    )
    return float(total)


@pytest.mark.parametrize(
    "m,r,lo,hi",
    [
        (106, 12, 0.006, 0.008),
        (106, 7, 0.27, 0.29),
        (30, 3, 0.18, 0.20),
    ],
)
def test_meta_test_reference_values(m, r, lo, hi):
    assert lo <= binomial_meta_test(m, r, 0.05) <= hi


def test_meta_test_matches_exact_fraction_oracle(rng):
    for _ in range(30):
        m = int(rng.integers(1, 200))
        r = int(rng.integers(0, m + 1))
        exact = exact_binomial_tail(m, r, Fraction(1, 20))
        assert binomial_meta_test(m, r, 0.05) == pytest.approx(exact, rel=1e-10, abs=1e-14)


def test_meta_test_trivial_and_errors():
    assert binomial_meta_test(50, 0, 0.05) == 1.0
    assert binomial_meta_test(0, 0, 0.05) == 1.0
    with pytest.raises(ValueError):
        binomial_meta_test(10, 11, 0.05)
    with pytest.raises(ValueError):
        binomial_meta_test(10, 2, 1.5)


def test_meta_test_monotonicity():
    values_r = [binomial_meta_test(40, r, 0.05) for r in range(0, 41)]
    assert all(a >= b for a, b in zip(values_r, values_r[1:]))
    values_alpha = [binomial_meta_test(40, 5, a) for a in (0.01, 0.05, 0.1, 0.3)]
    assert all(a <= b for a, b in zip(values_alpha, values_alpha[1:]))


# --- ledgers -------------------------------------------------------------------


def test_player_ledger_hand_count():
    events = [
        make_event(Decision.INCORRECT_NONCALL, committing_player="p", disadvantaged_player="x"),
        make_event(Decision.INCORRECT_NONCALL, committing_player="p"),
        make_event(Decision.INCORRECT_CALL, committing_player="y", disadvantaged_player="p"),
        make_event(Decision.CORRECT_CALL, committing_player="z"),
        make_event(Decision.INCORRECT_CALL, committing_player="q", disadvantaged_player="r"),
    ]
    spec = StudySpec(PLAYER, min_involvements=1)
    ledgers = {led.entity: led for led in build_ledgers(events, spec)}
    assert ledgers["p"].observed_beta == 3
    assert ledgers["p"].observed_delta == 0
    assert ledgers["p"].n_events == 3
    # the opponent on p's IC benefit is the committer y, harmed by the call
    assert ledgers["y"].observed_delta == 1


def test_home_ledger_roles_from_sides():
    events = [
        make_event(Decision.INCORRECT_NONCALL, committing_side=Side.HOME, disadvantaged_side=Side.VISITING),
        make_event(Decision.INCORRECT_CALL, committing_side=Side.VISITING, disadvantaged_side=Side.HOME),
        make_event(Decision.INCORRECT_CALL, committing_side=Side.HOME, disadvantaged_side=Side.VISITING),
        make_event(Decision.CORRECT_CALL),  # unknown sides: no resolvable role
    ]
    (led,) = build_ledgers(events, StudySpec(HOME))
    assert led.entity == HOME
    assert led.n_events == 3
    assert led.observed_beta == 2 and led.observed_delta == 1


def test_min_involvements_filter():
    events = [make_event(Decision.CORRECT_CALL, committing_player="busy") for _ in range(5)]
    events += [make_event(Decision.CORRECT_CALL, committing_player="rare")]
    specs = StudySpec(PLAYER, min_involvements=3)
    assert [led.entity for led in build_ledgers(events, specs)] == ["busy"]


def test_involvement_counts_any_grade_except_cnc():
    events = [
        make_event(Decision.CORRECT_CALL, committing_player="p"),
        make_event(Decision.INCORRECT_CALL, disadvantaged_player="p"),
        make_event(Decision.CORRECT_NONCALL, committing_player="p"),
    ]
    (led,) = build_ledgers(events, StudySpec(PLAYER, min_involvements=2))
    assert led.n_events == 2


def test_empty_selection_yields_empty_list():
    events = [make_event(season=2016)]
    assert build_ledgers(events, StudySpec(HOME, seasons=(2020, 2022))) == []


def test_season_and_type_filtering():
    events = [
        make_event(season=2016, season_type="regular", committing_side=Side.HOME),
        make_event(season=2016, season_type="playoffs", committing_side=Side.HOME),
        make_event(season=2021, season_type="regular", committing_side=Side.HOME),
        make_event(Decision.CORRECT_NONCALL, season=2016, committing_side=Side.HOME),
    ]
    spec = StudySpec(HOME, seasons=(2015, 2019), season_type="playoffs")
    assert len(filter_events(events, spec)) == 1
    spec_both = StudySpec(HOME, seasons=(2015, 2022), season_type="both")
    assert len(filter_events(events, spec_both)) == 3  # CNC dropped


def test_team_ledger_partition_bruteforce(rng):
    teams = ["bos", "mem", "den", None]
    events = []
    for _ in range(200):
        committing = teams[rng.integers(len(teams))]
        disadvantaged = teams[rng.integers(len(teams))]
        if committing is not None and committing == disadvantaged:
            disadvantaged = None
        events.append(
            make_event(
                Decision.CORRECT_CALL,
                committing_team=committing,
                disadvantaged_team=disadvantaged,
            )
        )
    ledgers = build_ledgers(events, StudySpec(TEAM))
    both = sum(1 for e in events if e.committing_team and e.disadvantaged_team)
    single = sum(1 for e in events if (e.committing_team is None) != (e.disadvantaged_team is None))
    assert sum(led.n_events for led in ledgers) == 2 * both + single


def test_ambiguous_same_entity_both_roles_skipped():
    events = [make_event(Decision.INCORRECT_CALL, committing_player="p", disadvantaged_player="p")]
    assert build_ledgers(events, StudySpec(PLAYER, min_involvements=1)) == []


def test_study_spec_validation():
    with pytest.raises(ValueError):
        StudySpec("galaxy")
    with pytest.raises(ValueError):
        StudySpec(HOME, seasons=(2020, 2015))
    with pytest.raises(ValueError):
        StudySpec(HOME, alpha=0.0)
    with pytest.raises(ValueError):
        StudySpec(HOME, season_type="preseason")


# --- studies -------------------------------------------------------------------


def _home_events(rng, n=400):
    events = []
    for _ in range(n):
        decision = [Decision.CORRECT_CALL, Decision.INCORRECT_CALL, Decision.INCORRECT_NONCALL][
            rng.integers(3)
        ]
        home_commits = bool(rng.integers(2))
        events.append(
            make_event(
                decision,
                violation_type=["a", "b"][rng.integers(2)],
                committing_side=Side.HOME if home_commits else Side.VISITING,
                disadvantaged_side=Side.VISITING if home_commits else Side.HOME,
            )
        )
    return events


def test_home_relabel_swaps_p_values_exactly(rng):
    events = _home_events(rng)
    relabeled = [
        replace(
            ev,
            committing_side=Side.VISITING if ev.committing_side is Side.HOME else Side.HOME,
            disadvantaged_side=Side.VISITING if ev.disadvantaged_side is Side.HOME else Side.HOME,
        )
        for ev in events
    ]
    config = SimConfig(replicates=600, master_seed=99)
    spec = StudySpec(HOME)
    ((_, out),) = run_study(events, spec, config)
    ((_, out_rel),) = run_study(relabeled, spec, config)
    assert out.observed_wg == -out_rel.observed_wg
    assert np.array_equal(out.null_samples, -out_rel.null_samples)
    assert out.p_upper == out_rel.p_lower and out.p_lower == out_rel.p_upper


def test_run_study_sorted_by_p_upper(rng):
    events = []
    for player, benefit in (("lucky", Decision.INCORRECT_NONCALL), ("neutral", Decision.CORRECT_CALL)):
        for _ in range(30):
            events.append(make_event(benefit, committing_player=player))
            events.append(make_event(Decision.CORRECT_CALL, disadvantaged_player=player))
    outcomes = run_study(
        events, StudySpec(PLAYER, min_involvements=10), SimConfig(replicates=300, master_seed=4)
    )
    p_values = [o.p_upper for _, o in outcomes]
    assert p_values == sorted(p_values)
    assert outcomes[0][0] == "lucky"


def test_entities_get_independent_streams():
    events = []
    for player in ("alice", "bob"):
        for _ in range(40):
            events.append(make_event(Decision.INCORRECT_CALL, committing_player=player))
            events.append(make_event(Decision.CORRECT_CALL, disadvantaged_player=player))
    outcomes = dict(
        run_study(events, StudySpec(PLAYER, min_involvements=10), SimConfig(replicates=400, master_seed=0))
    )
    assert not np.array_equal(outcomes["alice"].null_samples, outcomes["bob"].null_samples)


def test_player_study_uses_leave_one_out_rates():
    # "skew" commits 30 IC; everyone else's events are clean CC.
    # With leave-one-out rates skew's null is IC-free, so a biased-looking
    # record cannot soften its own null model.
    events = [make_event(Decision.INCORRECT_CALL, committing_player="skew") for _ in range(30)]
    events += [make_event(Decision.CORRECT_CALL, committing_player="clean") for _ in range(30)]
    outcomes = dict(
        run_study(events, StudySpec(PLAYER, min_involvements=5), SimConfig(replicates=200, master_seed=1))
    )
    skew = outcomes["skew"]
    assert skew.observed_wg == -30
    assert np.all(skew.null_samples == 0)  # LOO boundaries are (0, 0): only CC remains
    assert skew.p_lower == pytest.approx(1 / 201)


def test_classify_significance_threshold_cases():
    outcomes = [
        ("pos", outcome(p_upper=0.04, p_lower=0.97)),
        ("neg", outcome(p_upper=0.99, p_lower=0.01)),
        ("meh", outcome(p_upper=0.5, p_lower=0.52)),
    ]
    summary = classify_significance(outcomes, 0.05)
    assert summary.positive == ("pos",)
    assert summary.negative == ("neg",)
    assert summary.positive_meta == MetaTestResult(3, 1, 0.05, pytest.approx(1 - 0.95**3))
    assert summary.negative_meta.r_significant == 1


def test_classify_significance_all_null():
    outcomes = [("a", outcome()), ("b", outcome())]
    summary = classify_significance(outcomes, 0.05)
    assert summary.positive == () and summary.negative == ()
    assert summary.positive_meta.p_all_false_positive == 1.0
    with pytest.raises(ValueError):
        classify_significance([], 0.05)
