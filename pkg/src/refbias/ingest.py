"""Parsers for the four input tables: graded last-two-minute events,
technical fouls, box-score minutes, and person demographics.

Column bindings live in an external mapping config because the public
grade ledgers change schema across seasons. Every parser returns
(payload, RejectionReport); bad rows are counted and skipped, never
silently coerced.
"""

from __future__ import annotations

import csv
import io
import json
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

from .errors import ConfigError, NoDataError

REGULAR = "regular"
PLAYOFFS = "playoffs"
SEASON_TYPES = (REGULAR, PLAYOFFS)

RACE_WHITE = "white"
RACE_BLACK = "black"
RACE_OTHER = "other"
RACE_UNKNOWN = "unknown"
RACES = (RACE_WHITE, RACE_BLACK, RACE_OTHER, RACE_UNKNOWN)

MAPPING_SCHEMA_VERSION = 1
ALIAS_SCHEMA_VERSION = 1


class Decision(Enum):
    """The four grade values a ledger row can carry."""

    CORRECT_CALL = "CC"
    INCORRECT_CALL = "IC"
    INCORRECT_NONCALL = "INC"
    CORRECT_NONCALL = "CNC"


class Side(Enum):
    HOME = "home"
    VISITING = "visiting"
    UNKNOWN = "unknown"


@dataclass(frozen=True, slots=True)
class GradedEvent:
    """One graded call or non-call from a last-two-minute ledger."""

    game_id: str
    season: int
    season_type: str
    violation_type: str
    decision: Decision
    committing_side: Side = Side.UNKNOWN
    disadvantaged_side: Side = Side.UNKNOWN
    committing_player: str | None = None
    disadvantaged_player: str | None = None
    committing_team: str | None = None
    disadvantaged_team: str | None = None


@dataclass(frozen=True, slots=True)
class TechFoulEvent:
    """A personal technical foul with the calling referee and recipient."""

    game_id: str
    referee: str
    player: str
    context: str | None = None


@dataclass(frozen=True, slots=True)
class PersonDemographics:
    person: str
    role: str  # "player" | "referee"
    race: str  # one of RACES


@dataclass(frozen=True, slots=True)
class BoxScoreLine:
    game_id: str
    player: str
    minutes: float


@dataclass
class Demographics:
    """Race lookups split by role so a player and referee may share a name."""

    players: dict[str, PersonDemographics] = field(default_factory=dict)
    referees: dict[str, PersonDemographics] = field(default_factory=dict)

    def player_race(self, key: str) -> str:
        entry = self.players.get(key)
        return entry.race if entry else RACE_UNKNOWN

    def referee_race(self, key: str) -> str:
        entry = self.referees.get(key)
        return entry.race if entry else RACE_UNKNOWN


@dataclass(frozen=True, slots=True)
class RejectedRow:
    row: int
    reason: str
    raw: str


@dataclass
class RejectionReport:
    """Line-oriented account of skipped rows; retained + skipped == total."""

    source: str = ""
    total_rows: int = 0
    entries: list[RejectedRow] = field(default_factory=list)

    @property
    def skipped(self) -> int:
        return len(self.entries)

    @property
    def retained(self) -> int:
        return self.total_rows - self.skipped

    def add(self, row: int, reason: str, raw: str) -> None:
        self.entries.append(RejectedRow(row, reason, raw))

    def lines(self) -> list[str]:
        return [f"row {e.row}: {e.reason} | raw: {e.raw}" for e in self.entries]

    def write(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.lines()) + "\n" if self.entries else "", encoding="utf-8")


def normalize_violation_type(raw: str, aliases: Mapping[str, str] | None = None) -> str:
    """Canonicalize a violation label: casefold, collapse whitespace, tighten
    colons, then apply the alias table. Unknown labels pass through unchanged."""
    key = " ".join(raw.split()).casefold()
    key = key.replace(" :", ":").replace(": ", ":")
    if aliases:
        key = aliases.get(key, key)
    return key


def normalize_key(raw: str | None, aliases: Mapping[str, str] | None = None) -> str | None:
    """Normalize a person/team key: fold diacritics, casefold, collapse spaces."""
    if raw is None:
        return None
    folded = unicodedata.normalize("NFKD", raw)
    folded = "".join(ch for ch in folded if not unicodedata.combining(ch))
    key = " ".join(folded.split()).casefold()
    if not key:
        return None
    if aliases:
        key = aliases.get(key, key)
    return key


# --- mapping / alias configuration -----------------------------------------

_DECISION_VALUES = {
    "CC": "CC",
    "CORRECT CALL": "CC",
    "IC": "IC",
    "INCORRECT CALL": "IC",
    "INC": "INC",
    "INCORRECT NONCALL": "INC",
    "INCORRECT NON-CALL": "INC",
    "CNC": "CNC",
    "CORRECT NONCALL": "CNC",
    "CORRECT NON-CALL": "CNC",
}

_SIDE_VALUES = {
    "HOME": "home",
    "H": "home",
    "VISITING": "visiting",
    "VISITOR": "visiting",
    "AWAY": "visiting",
    "V": "visiting",
    "": "unknown",
    "UNKNOWN": "unknown",
}

_SEASON_TYPE_VALUES = {
    "REGULAR": REGULAR,
    "REGULAR SEASON": REGULAR,
    "REG": REGULAR,
    "PLAYOFF": PLAYOFFS,
    "PLAYOFFS": PLAYOFFS,
    "POSTSEASON": PLAYOFFS,
    "POST": PLAYOFFS,
}

_RACE_VALUES = {
    "WHITE": RACE_WHITE,
    "W": RACE_WHITE,
    "BLACK": RACE_BLACK,
    "AFRICAN AMERICAN": RACE_BLACK,
    "AFRICAN-AMERICAN": RACE_BLACK,
    "B": RACE_BLACK,
    "ASIAN": RACE_OTHER,
    "HISPANIC": RACE_OTHER,
    "LATINO": RACE_OTHER,
    "MIXED": RACE_OTHER,
    "OTHER": RACE_OTHER,
    "UNKNOWN": RACE_UNKNOWN,
    "": RACE_UNKNOWN,
}

_ROLE_VALUES = {
    "PLAYER": "player",
    "REFEREE": "referee",
    "REF": "referee",
    "OFFICIAL": "referee",
}

DEFAULT_TECH_EXCLUDE = (
    "delay of game",
    "delay technical",
    "defensive 3 second",
    "defense 3 second",
    "3 seconds",
    "too many players",
)


@dataclass(frozen=True)
class SourceSpec:
    """Column and value bindings for one input table."""

    columns: Mapping[str, str] = field(default_factory=dict)
    values: Mapping[str, Mapping[str, str]] = field(default_factory=dict)
    delimiter: str = ","

    def column(self, canonical: str) -> str:
        return self.columns.get(canonical, canonical)

    def value_map(self, fieldname: str, defaults: Mapping[str, str]) -> dict[str, str]:
        merged = dict(defaults)
        for raw, canonical in self.values.get(fieldname, {}).items():
            merged[raw.strip().upper()] = canonical
        return merged


@dataclass(frozen=True)
class MappingConfig:
    """Versioned bindings for every source plus shared parse settings.

    JSON layout (all sections optional; canonical column names are the
    defaults)::

        {
          "schema_version": 1,
          "season_window": [2015, 2022],
          "minutes_cap": 65,
          "tech_exclude": ["delay of game", ...],
          "l2m":          {"delimiter": ",", "columns": {...}, "values": {...}},
          "tech_fouls":   {...},
          "box_scores":   {...},
          "demographics": {...},
          "officials":    {...}
        }
    """

    l2m: SourceSpec = field(default_factory=SourceSpec)
    tech_fouls: SourceSpec = field(default_factory=SourceSpec)
    box_scores: SourceSpec = field(default_factory=SourceSpec)
    demographics: SourceSpec = field(default_factory=SourceSpec)
    officials: SourceSpec = field(default_factory=SourceSpec)
    season_window: tuple[int, int] = (2015, 2022)
    minutes_cap: float = 65.0
    tech_exclude: tuple[str, ...] = DEFAULT_TECH_EXCLUDE


@dataclass(frozen=True)
class AliasTable:
    """Label merges applied after normalization. Default: merge nothing."""

    violations: Mapping[str, str] = field(default_factory=dict)
    players: Mapping[str, str] = field(default_factory=dict)
    teams: Mapping[str, str] = field(default_factory=dict)


_SOURCE_SECTIONS = ("l2m", "tech_fouls", "box_scores", "demographics", "officials")


def _load_json(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return doc


def _source_spec(section: object, where: str) -> SourceSpec:
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(section) - {"columns", "values", "delimiter"}
    if unknown:
        raise ConfigError(f"{where} has unknown keys: {sorted(unknown)}")
    return SourceSpec(
        columns=dict(section.get("columns", {})),
        values={k: dict(v) for k, v in section.get("values", {}).items()},
        delimiter=section.get("delimiter", ","),
    )


def load_mapping(path: str | Path | None) -> MappingConfig:
    """Load a mapping config file; None yields the canonical defaults."""
    if path is None:
        return MappingConfig()
    doc = _load_json(path)
    if doc.get("schema_version") != MAPPING_SCHEMA_VERSION:
        raise ConfigError(
            f"mapping config {path}: schema_version must be {MAPPING_SCHEMA_VERSION}"
        )
    known = set(_SOURCE_SECTIONS) | {"schema_version", "season_window", "minutes_cap", "tech_exclude"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"mapping config {path} has unknown keys: {sorted(unknown)}")
    kwargs: dict = {}
    for name in _SOURCE_SECTIONS:
        if name in doc:
            kwargs[name] = _source_spec(doc[name], f"mapping config section '{name}'")
    if "season_window" in doc:
        lo, hi = doc["season_window"]
        kwargs["season_window"] = (int(lo), int(hi))
    if "minutes_cap" in doc:
        kwargs["minutes_cap"] = float(doc["minutes_cap"])
    if "tech_exclude" in doc:
        kwargs["tech_exclude"] = tuple(
            normalize_violation_type(label) for label in doc["tech_exclude"]
        )
    return MappingConfig(**kwargs)


def load_aliases(path: str | Path | None) -> AliasTable:
    """Load an alias table; None yields the empty table (no merging)."""
    if path is None:
        return AliasTable()
    doc = _load_json(path)
    if doc.get("schema_version") != ALIAS_SCHEMA_VERSION:
        raise ConfigError(f"alias table {path}: schema_version must be {ALIAS_SCHEMA_VERSION}")
    unknown = set(doc) - {"schema_version", "violations", "players", "teams"}
    if unknown:
        raise ConfigError(f"alias table {path} has unknown keys: {sorted(unknown)}")
    def key_map(section: str, normalize) -> dict[str, str]:
        table = {}
        for raw_key, raw_value in doc.get(section, {}).items():
            key, value = normalize(raw_key), normalize(raw_value)
            if not key or not value:
                raise ConfigError(f"alias table {path}: empty {section} entry {raw_key!r}")
            table[key] = value
        return table

    return AliasTable(
        violations=key_map("violations", normalize_violation_type),
        players=key_map("players", normalize_key),
        teams=key_map("teams", normalize_key),
    )


# --- row iteration ----------------------------------------------------------


class _RowError(Exception):
    """Internal: one row failed validation; message becomes the reject reason."""


def _open_text(source: str | Path | IO) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, io.TextIOBase):
        return source
    if hasattr(source, "read"):
        return io.TextIOWrapper(source, encoding="utf-8", newline="")
    raise TypeError(f"unsupported source type: {type(source)!r}")


def _iter_rows(
    source: str | Path | IO,
    spec: SourceSpec,
    required: Sequence[str],
    optional: Sequence[str] = (),
):
    """Yield (row_number, values-by-canonical-field, raw_line) for each data row."""
    handle = _open_text(source)
    try:
        reader = csv.reader(handle, delimiter=spec.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise NoDataError(f"no data in {getattr(handle, 'name', 'source')}") from None
        positions = {name.strip(): i for i, name in enumerate(header)}
        binding: dict[str, int] = {}
        missing = []
        for canonical in required:
            col = spec.column(canonical)
            if col not in positions:
                missing.append(col)
            else:
                binding[canonical] = positions[col]
        if missing:
            raise ConfigError(f"missing mapped column(s): {missing}")
        for canonical in optional:
            col = spec.columns.get(canonical)
            if col is not None:
                if col not in positions:
                    raise ConfigError(f"missing mapped column(s): [{col!r}]")
                binding[canonical] = positions[col]
            elif canonical in positions:
                binding[canonical] = positions[canonical]
        for rownum, row in enumerate(reader, start=1):
            values = {
                name: (row[i].strip() if i < len(row) else "") for name, i in binding.items()
            }
            yield rownum, values, spec.delimiter.join(row)
    finally:
        if isinstance(source, (str, Path)):
            handle.close()


def _mapped_value(raw: str, table: Mapping[str, str], what: str) -> str:
    token = raw.strip().upper()
    if token not in table:
        raise _RowError(f"unknown {what} {raw!r}")
    return table[token]


# --- parsers ----------------------------------------------------------------

_L2M_REQUIRED = ("game_id", "season", "season_type", "violation_type", "decision")
_L2M_OPTIONAL = (
    "committing_side",
    "disadvantaged_side",
    "committing_player",
    "disadvantaged_player",
    "committing_team",
    "disadvantaged_team",
    "home_team",
    "away_team",
)


def parse_l2m(
    source: str | Path | IO,
    config: MappingConfig | None = None,
    aliases: AliasTable | None = None,
) -> tuple[list[GradedEvent], RejectionReport]:
    """Parse a graded-event ledger into validated GradedEvents.

    Rows with unparseable grades, seasons outside the coverage window, or
    conflicting sides are reported and skipped. Correct-non-call rows are
    retained (they carry Decision.CORRECT_NONCALL and are excluded from
    every rate and gain computation downstream). When side columns are
    not mapped but home/away team columns are, sides are derived from the
    team fields.
    """
    config = config or MappingConfig()
    aliases = aliases or AliasTable()
    spec = config.l2m
    decision_map = spec.value_map("decision", _DECISION_VALUES)
    side_map = spec.value_map("side", _SIDE_VALUES)
    season_type_map = spec.value_map("season_type", _SEASON_TYPE_VALUES)
    lo, hi = config.season_window

    report = RejectionReport(source=str(source))
    events: list[GradedEvent] = []
    for rownum, values, raw in _iter_rows(source, spec, _L2M_REQUIRED, _L2M_OPTIONAL):
        report.total_rows += 1
        try:
            events.append(
                _build_event(values, decision_map, side_map, season_type_map, (lo, hi), aliases)
            )
        except _RowError as exc:
            report.add(rownum, str(exc), raw)
    if report.total_rows == 0:
        raise NoDataError(f"no data rows in {source}")
    return events, report


def _build_event(
    values: Mapping[str, str],
    decision_map: Mapping[str, str],
    side_map: Mapping[str, str],
    season_type_map: Mapping[str, str],
    window: tuple[int, int],
    aliases: AliasTable,
) -> GradedEvent:
    game_id = values["game_id"]
    if not game_id:
        raise _RowError("missing game_id")
    try:
        season = int(values["season"])
    except ValueError:
        raise _RowError(f"unparseable season {values['season']!r}") from None
    if not window[0] <= season <= window[1]:
        raise _RowError(f"season {season} outside coverage window {window[0]}-{window[1]}")
    season_type = _mapped_value(values["season_type"], season_type_map, "season type")
    if not values["violation_type"]:
        raise _RowError("missing violation type")
    violation = normalize_violation_type(values["violation_type"], aliases.violations)
    decision = Decision(_mapped_value(values["decision"], decision_map, "decision"))

    committing_team = normalize_key(values.get("committing_team") or None, aliases.teams)
    disadvantaged_team = normalize_key(values.get("disadvantaged_team") or None, aliases.teams)

    def side_of(field: str, team: str | None) -> Side:
        if field in values:
            return Side(_mapped_value(values[field], side_map, "side"))
        home = normalize_key(values.get("home_team") or None, aliases.teams)
        away = normalize_key(values.get("away_team") or None, aliases.teams)
        if team is not None and home is not None:
            if team == home:
                return Side.HOME
            if team == away:
                return Side.VISITING
        return Side.UNKNOWN

    committing_side = side_of("committing_side", committing_team)
    disadvantaged_side = side_of("disadvantaged_side", disadvantaged_team)
    if (
        committing_side is not Side.UNKNOWN
        and disadvantaged_side is not Side.UNKNOWN
        and committing_side is disadvantaged_side
    ):
        raise _RowError(f"conflicting sides: both parties {committing_side.value}")

    return GradedEvent(
        game_id=game_id,
        season=season,
        season_type=season_type,
        violation_type=violation,
        decision=decision,
        committing_side=committing_side,
        disadvantaged_side=disadvantaged_side,
        committing_player=normalize_key(values.get("committing_player") or None, aliases.players),
        disadvantaged_player=normalize_key(
            values.get("disadvantaged_player") or None, aliases.players
        ),
        committing_team=committing_team,
        disadvantaged_team=disadvantaged_team,
    )


def parse_tech_fouls(
    source: str | Path | IO,
    config: MappingConfig | None = None,
) -> tuple[list[TechFoulEvent], RejectionReport]:
    """Parse technical-foul rows, keeping personal technicals only.

    When a `foul_label` column is bound, rows whose normalized label
    contains a configured exclusion pattern (delay of game, defensive
    3 second, ...) are filtered out and counted in the report.
    """
    config = config or MappingConfig()
    spec = config.tech_fouls
    report = RejectionReport(source=str(source))
    fouls: list[TechFoulEvent] = []
    for rownum, values, raw in _iter_rows(
        source, spec, ("game_id", "referee", "player"), ("foul_label",)
    ):
        report.total_rows += 1
        label = normalize_violation_type(values["foul_label"]) if values.get("foul_label") else ""
        if label and any(pattern in label for pattern in config.tech_exclude):
            report.add(rownum, f"filtered: non-personal technical {label!r}", raw)
            continue
        referee = normalize_key(values["referee"])
        player = normalize_key(values["player"])
        if not values["game_id"] or referee is None or player is None:
            report.add(rownum, "missing game_id, referee, or player", raw)
            continue
        fouls.append(TechFoulEvent(values["game_id"], referee, player, label or None))
    if report.total_rows == 0:
        raise NoDataError(f"no data rows in {source}")
    return fouls, report


def _parse_minutes(raw: str) -> float:
    if ":" in raw:
        mins, _, secs = raw.partition(":")
        return int(mins) + int(secs) / 60.0
    return float(raw)


def parse_box_scores(
    source: str | Path | IO,
    config: MappingConfig | None = None,
) -> tuple[list[BoxScoreLine], RejectionReport]:
    """Parse per-game player minutes; accepts decimal minutes or MM:SS."""
    config = config or MappingConfig()
    spec = config.box_scores
    report = RejectionReport(source=str(source))
    lines: list[BoxScoreLine] = []
    for rownum, values, raw in _iter_rows(source, spec, ("game_id", "player", "minutes")):
        report.total_rows += 1
        player = normalize_key(values["player"])
        if not values["game_id"] or player is None:
            report.add(rownum, "missing game_id or player", raw)
            continue
        try:
            minutes = _parse_minutes(values["minutes"])
        except ValueError:
            report.add(rownum, f"unparseable minutes {values['minutes']!r}", raw)
            continue
        if minutes < 0:
            report.add(rownum, f"negative minutes {minutes}", raw)
            continue
        if minutes > config.minutes_cap:
            report.add(rownum, f"minutes {minutes} above cap {config.minutes_cap}", raw)
            continue
        lines.append(BoxScoreLine(values["game_id"], player, minutes))
    if report.total_rows == 0:
        raise NoDataError(f"no data rows in {source}")
    return lines, report


def parse_demographics(
    source: str | Path | IO,
    config: MappingConfig | None = None,
) -> tuple[Demographics, RejectionReport]:
    """Parse person/role/race rows into role-split lookup tables."""
    config = config or MappingConfig()
    spec = config.demographics
    race_map = spec.value_map("race", _RACE_VALUES)
    role_map = spec.value_map("role", _ROLE_VALUES)
    report = RejectionReport(source=str(source))
    demo = Demographics()
    for rownum, values, raw in _iter_rows(source, spec, ("person", "role", "race")):
        report.total_rows += 1
        person = normalize_key(values["person"])
        if person is None:
            report.add(rownum, "missing person", raw)
            continue
        try:
            role = _mapped_value(values["role"], role_map, "role")
            race = _mapped_value(values["race"], race_map, "race")
        except _RowError as exc:
            report.add(rownum, str(exc), raw)
            continue
        table = demo.players if role == "player" else demo.referees
        existing = table.get(person)
        if existing is not None and existing.race != race:
            report.add(rownum, f"conflicting duplicate for {person!r}", raw)
            continue
        table[person] = PersonDemographics(person, role, race)
    if report.total_rows == 0:
        raise NoDataError(f"no data rows in {source}")
    return demo, report


def parse_officials(
    source: str | Path | IO,
    config: MappingConfig | None = None,
) -> tuple[dict[str, tuple[str, ...]], RejectionReport]:
    """Parse (game_id, referee) rows into a per-game referee roster."""
    config = config or MappingConfig()
    spec = config.officials
    report = RejectionReport(source=str(source))
    crews: dict[str, set[str]] = {}
    for rownum, values, raw in _iter_rows(source, spec, ("game_id", "referee")):
        report.total_rows += 1
        referee = normalize_key(values["referee"])
        if not values["game_id"] or referee is None:
            report.add(rownum, "missing game_id or referee", raw)
            continue
        crews.setdefault(values["game_id"], set()).add(referee)
    if report.total_rows == 0:
        raise NoDataError(f"no data rows in {source}")
    return {game: tuple(sorted(refs)) for game, refs in crews.items()}, report


# --- canonical serialization -------------------------------------------------

CANONICAL_L2M_COLUMNS = (
    "game_id",
    "season",
    "season_type",
    "violation_type",
    "decision",
    "committing_side",
    "disadvantaged_side",
    "committing_player",
    "disadvantaged_player",
    "committing_team",
    "disadvantaged_team",
)


def write_l2m_csv(events: Iterable[GradedEvent], target: str | Path | IO[str]) -> None:
    """Write events in the canonical schema; parse_l2m round-trips it."""
    own = isinstance(target, (str, Path))
    handle = open(target, "w", encoding="utf-8", newline="") if own else target
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CANONICAL_L2M_COLUMNS)
        for ev in events:
            writer.writerow(
                [
                    ev.game_id,
                    ev.season,
                    ev.season_type,
                    ev.violation_type,
                    ev.decision.value,
                    "" if ev.committing_side is Side.UNKNOWN else ev.committing_side.value,
                    "" if ev.disadvantaged_side is Side.UNKNOWN else ev.disadvantaged_side.value,
                    ev.committing_player or "",
                    ev.disadvantaged_player or "",
                    ev.committing_team or "",
                    ev.disadvantaged_team or "",
                ]
            )
    finally:
        if own:
            handle.close()
