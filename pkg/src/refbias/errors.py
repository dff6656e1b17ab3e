"""Exception types shared across the package."""

from __future__ import annotations


class RefbiasError(Exception):
    """Base class for all refbias errors."""

    exit_code = 1

    def details(self) -> dict:
        return {}


class ConfigError(RefbiasError):
    """Bad mapping/alias configuration or a source missing mapped columns."""


class NoDataError(RefbiasError):
    """An input held no usable data rows."""

    exit_code = 3


class DataGapError(RefbiasError):
    """Required records are missing for retained entities (e.g. box scores)."""

    exit_code = 3

    def __init__(self, message: str, missing: list[str] | None = None):
        super().__init__(message)
        self.missing = missing or []

    def details(self) -> dict:
        return {"missing": self.missing}


class SimulationError(RefbiasError):
    """The null model cannot be simulated (undefined rates, empty roster)."""


class DegenerateNullError(SimulationError):
    """The null distribution is degenerate (e.g. one race bucket has no exposure)."""
