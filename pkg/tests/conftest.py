from __future__ import annotations

import numpy as np
import pytest

from refbias.ingest import Decision, GradedEvent, Side


def make_event(
    decision=Decision.CORRECT_CALL,
    violation_type="foul:personal",
    committing_side=Side.UNKNOWN,
    disadvantaged_side=Side.UNKNOWN,
    committing_player=None,
    disadvantaged_player=None,
    committing_team=None,
    disadvantaged_team=None,
    game_id="g0001",
    season=2018,
    season_type="regular",
) -> GradedEvent:
    return GradedEvent(
        game_id=game_id,
        season=season,
        season_type=season_type,
        violation_type=violation_type,
        decision=decision,
        committing_side=committing_side,
        disadvantaged_side=disadvantaged_side,
        committing_player=committing_player,
        disadvantaged_player=disadvantaged_player,
        committing_team=committing_team,
        disadvantaged_team=disadvantaged_team,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
