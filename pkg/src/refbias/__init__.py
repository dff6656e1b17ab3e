"""Officiating-bias analysis for NBA last-two-minute grade ledgers.

Pipeline: ingest graded events, technical fouls, box scores and
demographics; estimate per-violation call-accuracy rates; resample event
outcomes under a seeded Monte Carlo null model to test home-court,
player, team, and referee-player-race effects.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .kernels import BACKEND

__all__ = ["BACKEND", "__version__"]
