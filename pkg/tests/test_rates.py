import pytest

from conftest import make_event
from refbias.ingest import Decision
from refbias.rates import (
    ViolationCounts,
    ViolationRates,
    aggregate_counts,
    build_rate_table,
    compute_rates,
    count_decisions,
    leave_one_out_rates,
    rates_from_counts,
    smoothed_rates,
)


def events_for(violation_type, cc=0, ic=0, inc=0, cnc=0, **kw):
    out = []
    out += [make_event(Decision.CORRECT_CALL, violation_type, **kw) for _ in range(cc)]
    out += [make_event(Decision.INCORRECT_CALL, violation_type, **kw) for _ in range(ic)]
    out += [make_event(Decision.INCORRECT_NONCALL, violation_type, **kw) for _ in range(inc)]
    out += [make_event(Decision.CORRECT_NONCALL, violation_type, **kw) for _ in range(cnc)]
    return out


def test_hand_arithmetic_oracle():
    rates = compute_rates(events_for("foul:personal", cc=90, ic=3, inc=10))["foul:personal"]
    assert rates.precision == pytest.approx(90 / 93)
    assert rates.recall == pytest.approx(0.900)
    assert rates.boundaries == pytest.approx((3 / 103, 13 / 103))
    assert rates.n_events == 103


def test_perfect_calls_identity():
    rates = compute_rates(events_for("violation:lane", cc=5))["violation:lane"]
    assert rates.precision == 1.0
    assert rates.recall == 1.0
    assert rates.boundaries == (0.0, 0.0)


def test_undefined_rates_are_none_not_defaults():
    rates = rates_from_counts(ViolationCounts("x", cc=0, ic=0, inc=3))
    assert rates.precision is None  # cc + ic == 0
    assert rates.recall == 0.0
    assert rates.boundaries == (0.0, 1.0)
    empty = rates_from_counts(ViolationCounts("x"))
    assert empty.precision is None and empty.recall is None and empty.boundaries is None


def test_cnc_never_enters_tallies():
    events = events_for("foul:personal", cc=2, ic=1, cnc=50)
    counts = count_decisions(events)["foul:personal"]
    assert counts.total == 3


def test_compute_rates_empty_and_permutation_invariant(rng):
    assert compute_rates([]) == {}
    events = events_for("a", cc=5, ic=2, inc=1) + events_for("b", cc=1, inc=4)
    shuffled = list(events)
    rng.shuffle(shuffled)
    assert compute_rates(events) == compute_rates(shuffled)


def test_type_totals_partition_non_cnc_events(rng):
    events = (
        events_for("a", cc=5, ic=2, inc=1, cnc=3)
        + events_for("b", cc=1, inc=4)
        + events_for("c", ic=2, cnc=1)
    )
    counts = count_decisions(events)
    non_cnc = sum(1 for ev in events if ev.decision is not Decision.CORRECT_NONCALL)
    assert sum(c.total for c in counts.values()) == non_cnc


def test_boundary_ordering_raw_and_smoothed(rng):
    prior = ViolationCounts("__pooled__", cc=80, ic=5, inc=15)
    for _ in range(200):
        cc, ic, inc = rng.integers(0, 30, 3)
        counts = ViolationCounts("x", cc=int(cc), ic=int(ic), inc=int(inc))
        for weight in (0.0, 0.5, 7.0):
            rates = smoothed_rates(counts, prior, weight)
            if rates.boundaries is not None:
                b_ic, b_inc = rates.boundaries
                assert 0.0 <= b_ic <= b_inc <= 1.0


def test_smoothing_hand_oracle():
    counts = ViolationCounts("x", cc=0, ic=0, inc=1)
    prior = ViolationCounts("__pooled__", cc=80, ic=5, inc=15)  # proportions .80/.05/.15
    rates = smoothed_rates(counts, prior, 10.0)
    assert rates.b_ic == pytest.approx(0.5 / 11)
    assert rates.b_inc == pytest.approx((0.5 + 1 + 1.5) / 11)


def test_smoothing_zero_weight_identity_and_limit():
    counts = ViolationCounts("x", cc=7, ic=2, inc=4)
    prior = ViolationCounts("__pooled__", cc=800, ic=50, inc=150)
    assert smoothed_rates(counts, prior, 0.0) == rates_from_counts(counts)
    heavy = smoothed_rates(counts, prior, 1e6)
    assert heavy.b_ic == pytest.approx(0.05, abs=1e-4)
    assert heavy.b_inc == pytest.approx(0.20, abs=1e-4)


def test_smoothing_rejects_negative_weight():
    with pytest.raises(ValueError):
        smoothed_rates(ViolationCounts("x", cc=1), ViolationCounts("p", cc=1), -1.0)


def player_events():
    # 10 events of one type; 4 involve player "p" (cc=3, ic=1), 6 do not (cc=4, ic=1, inc=1)
    involved = events_for("foul:personal", cc=3, committing_player="p") + events_for(
        "foul:personal", ic=1, disadvantaged_player="p"
    )
    rest = events_for("foul:personal", cc=4, ic=1, inc=1, committing_player="q")
    return involved + rest


def test_leave_one_out_recount_by_hand():
    result = leave_one_out_rates(player_events(), "p", "player")
    rates = result.rates["foul:personal"]
    assert rates.n_events == 6
    assert rates.precision == pytest.approx(4 / 5)
    assert rates.boundaries == pytest.approx((1 / 6, 2 / 6))
    assert not result.fallback_types


def test_leave_one_out_noop_when_uninvolved():
    events = player_events()
    assert leave_one_out_rates(events, "nobody", "player").rates == compute_rates(events)


def test_leave_one_out_total_exclusion_falls_back():
    events = events_for("foul:personal", cc=3, ic=1, committing_player="p")
    result = leave_one_out_rates(events, "p", "player")
    assert result.fallback_types == {"foul:personal"}
    assert result.rates["foul:personal"] == compute_rates(events)["foul:personal"]


def test_leave_one_out_equals_bruteforce_set_difference(rng):
    players = ["a", "b", "c", None]
    types = ["t1", "t2", "t3"]
    events = []
    for _ in range(300):
        events.append(
            make_event(
                decision=[Decision.CORRECT_CALL, Decision.INCORRECT_CALL, Decision.INCORRECT_NONCALL][
                    rng.integers(3)
                ],
                violation_type=types[rng.integers(len(types))],
                committing_player=players[rng.integers(len(players))],
                disadvantaged_player=players[rng.integers(len(players))],
            )
        )
    result = leave_one_out_rates(events, "b", "player")
    remaining = [
        ev for ev in events if "b" not in (ev.committing_player, ev.disadvantaged_player)
    ]
    brute = compute_rates(remaining)
    for vt, rates in result.rates.items():
        if vt in result.fallback_types:
            assert vt not in brute or brute[vt].n_events == 0
        else:
            assert rates == brute[vt]


def test_leave_one_out_team_kind():
    events = events_for("t", cc=4, committing_team="mem") + events_for("t", ic=2, committing_team="bos")
    result = leave_one_out_rates(events, "mem", "team")
    assert result.rates["t"].n_events == 2


def test_build_rate_table_smoothing_matches_manual():
    events = events_for("a", cc=8, ic=1, inc=1) + events_for("b", cc=1, ic=1)
    counts = count_decisions(events)
    prior = aggregate_counts(counts.values())
    table = build_rate_table(events, smoothing_weight=5.0)
    assert table["a"] == smoothed_rates(counts["a"], prior, 5.0)
    assert table["b"] == smoothed_rates(counts["b"], prior, 5.0)


def test_from_boundaries_validation():
    rates = ViolationRates.from_boundaries("x", 0.1, 0.4)
    assert rates.boundaries == (0.1, 0.4)
    with pytest.raises(ValueError):
        ViolationRates.from_boundaries("x", 0.5, 0.4)
