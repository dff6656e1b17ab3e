"""Command-line entry point: `refbias {rates,home,players,teams,race,power}`.

Every subcommand writes one report (CSV or JSON) with a provenance
metadata header: tool version, kernel backend, seed, replicate count,
resolved parameters, and SHA-256 digests of every input file. Re-running
with identical flags and inputs reproduces the report byte for byte;
--threads changes wall-clock only.

Exit codes: 0 success, 2 usage error, 3 missing/empty data (a structured
JSON error is printed to stderr), 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, analyses, ingest, race, synth
from .engine import SimConfig
from .errors import ConfigError, NoDataError, RefbiasError
from .kernels import BACKEND
from .rates import build_rate_table
from .reports import ExtraTable, Report, round6, sha256_digest

DATA_DIR_ENV = "REFBIAS_DATA_DIR"

_DEFAULT_FILES = {
    "l2m": "l2m.csv",
    "tech_fouls": "tech_fouls.csv",
    "box_scores": "box_scores.csv",
    "demographics": "demographics.csv",
    "officials": "officials.csv",
}


def _add_io_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data-dir", default=None, help=f"input directory (or ${DATA_DIR_ENV})")
    parser.add_argument("--mapping", default=None, help="column-mapping config (JSON)")
    parser.add_argument("--aliases", default=None, help="alias table (JSON)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--out", default="-", help="report path ('-' = stdout)")
    parser.add_argument("--rejects", default=None, help="write the rejection report here")


def _add_sim_args(parser: argparse.ArgumentParser, replicates: int = 10_000) -> None:
    parser.add_argument("--replicates", type=int, default=replicates)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument(
        "--smoothing-m",
        type=float,
        nargs="?",
        const=20.0,
        default=0.0,
        help="shrink boundaries toward pooled proportions by this pseudo-count "
        "(bare flag = 20; omitted = raw rates)",
    )


def _add_study_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seasons", default="2015-2022", help="inclusive range, e.g. 2015-2022")
    parser.add_argument(
        "--season-type", "--type", choices=("regular", "playoffs", "both"), default="both"
    )
    parser.add_argument("--alpha", type=float, default=0.05)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refbias",
        description="Officiating-bias analysis on last-two-minute grade ledgers",
    )
    parser.add_argument("--version", action="version", version=f"refbias {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rates = sub.add_parser("rates", help="per-violation precision/recall table")
    p_rates.add_argument("--l2m", default=None)
    _add_study_args(p_rates)
    _add_io_args(p_rates)
    p_rates.set_defaults(func=_cmd_rates)

    for kind, help_text in (
        ("home", "home-side net whistle gain study"),
        ("players", "per-player net whistle gain study"),
        ("teams", "per-team net whistle gain study"),
    ):
        p = sub.add_parser(kind, help=help_text)
        p.add_argument("--l2m", default=None)
        if kind == "players":
            p.add_argument("--min-involvements", type=int, default=100)
        _add_study_args(p)
        _add_sim_args(p)
        _add_io_args(p)
        p.set_defaults(func=_cmd_study, kind={"home": analyses.HOME, "players": analyses.PLAYER, "teams": analyses.TEAM}[kind])

    p_race = sub.add_parser("race", help="referee-player race audit on technical fouls")
    for name in ("tech-fouls", "box-scores", "demographics", "officials"):
        p_race.add_argument(f"--{name}", default=None)
    p_race.add_argument("--race-model", choices=race.MODELS, default="bernoulli")
    p_race.add_argument("--bins", type=int, default=40, help="histogram bins for the null")
    _add_sim_args(p_race)
    _add_io_args(p_race)
    p_race.set_defaults(func=_cmd_race)

    p_power = sub.add_parser("power", help="detection-rate curve on synthetic ledgers")
    p_power.add_argument("--games", type=int, default=1200)
    p_power.add_argument("--events-mean", type=float, default=16.0)
    p_power.add_argument("--events-dispersion", type=float, default=0.0)
    p_power.add_argument("--bias-levels", default="0,0.02,0.05")
    p_power.add_argument("--trials", type=int, default=200)
    p_power.add_argument("--alpha", type=float, default=0.05)
    p_power.add_argument("--emit-data", default=None, help="also write one canonical CSV per bias level")
    _add_sim_args(p_power, replicates=999)
    _add_io_args(p_power)
    p_power.set_defaults(func=_cmd_power)

    return parser


def dispatch(argv: list[str] | None = None) -> int:
    """Parse args and run one subcommand, mapping errors to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except RefbiasError as exc:
        error = {
            "error": {
                "type": type(exc).__name__,
                "message": str(exc),
                "details": exc.details(),
            }
        }
        sys.stderr.write(json.dumps(error, indent=2) + "\n")
        return exc.exit_code
    except SystemExit as exc:
        return int(exc.code or 0)


def main() -> None:
    sys.exit(dispatch())


# --- shared plumbing ---------------------------------------------------------


def _data_dir(args) -> Path | None:
    raw = args.data_dir or os.environ.get(DATA_DIR_ENV)
    return Path(raw) if raw else None


def _resolve_input(args, flag: str) -> Path:
    explicit = getattr(args, flag, None)
    if explicit:
        path = Path(explicit)
        if not path.exists():
            raise NoDataError(f"input file not found: {path}")
        return path
    base = _data_dir(args)
    if base is not None:
        path = base / _DEFAULT_FILES[flag]
        if path.exists():
            return path
        raise NoDataError(f"input file not found: {path}")
    raise NoDataError(
        f"no --{flag.replace('_', '-')} given and no data directory configured"
    )


def _resolve_config(args, attr: str, default_name: str) -> Path | None:
    explicit = getattr(args, attr, None)
    if explicit:
        return Path(explicit)
    base = _data_dir(args)
    if base is not None and (base / default_name).exists():
        return base / default_name
    return None


def _load_configs(args) -> tuple[ingest.MappingConfig, ingest.AliasTable, dict[str, str]]:
    mapping_path = _resolve_config(args, "mapping", "mapping.json")
    alias_path = _resolve_config(args, "aliases", "aliases.json")
    digests = {}
    if mapping_path:
        digests["mapping"] = sha256_digest(mapping_path)
    if alias_path:
        digests["aliases"] = sha256_digest(alias_path)
    return ingest.load_mapping(mapping_path), ingest.load_aliases(alias_path), digests


def _seasons(args) -> tuple[int, int]:
    raw = args.seasons
    try:
        lo, _, hi = raw.partition("-")
        return (int(lo), int(hi or lo))
    except ValueError:
        raise ConfigError(f"bad --seasons value {raw!r}; expected e.g. 2015-2022") from None


def _metadata(args, command: str, inputs: dict[str, str], **params) -> dict:
    meta: dict[str, object] = {
        "tool": "refbias",
        "version": __version__,
        "command": command,
        "backend": BACKEND,
    }
    meta.update(params)
    for name, digest in sorted(inputs.items()):
        meta[f"input.{name}"] = digest
    return meta


def _write_rejects(args, *reports: ingest.RejectionReport) -> None:
    if args.rejects:
        lines: list[str] = []
        for report in reports:
            lines.extend(report.lines())
        Path(args.rejects).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


# --- subcommands -------------------------------------------------------------


def _cmd_rates(args) -> int:
    mapping, aliases, digests = _load_configs(args)
    l2m_path = _resolve_input(args, "l2m")
    digests["l2m"] = sha256_digest(l2m_path)
    events, rejects = ingest.parse_l2m(l2m_path, mapping, aliases)
    _write_rejects(args, rejects)
    seasons = _seasons(args)
    spec = analyses.StudySpec(analyses.HOME, seasons=seasons, season_type=args.season_type)
    table = build_rate_table(analyses.filter_events(events, spec))
    if not table:
        raise NoDataError("no graded events after filtering")
    rows = [
        {
            "violation": vt,
            "precision": None if r.precision is None else round6(r.precision),
            "recall": None if r.recall is None else round6(r.recall),
            "n": r.n_events,
        }
        for vt, r in sorted(table.items(), key=lambda kv: (-kv[1].n_events, kv[0]))
    ]
    meta = _metadata(
        args,
        "rates",
        digests,
        seasons=f"{seasons[0]}-{seasons[1]}",
        season_type=args.season_type,
        rows_total=rejects.total_rows,
        rows_skipped=rejects.skipped,
    )
    Report(meta, ("violation", "precision", "recall", "n"), rows).write(args.out, args.format)
    return 0


def _study_rows(outcomes, alpha):
    rows = []
    for entity, o in outcomes:
        if o.p_upper <= alpha and o.p_lower <= alpha:
            direction = "both"
        elif o.p_upper <= alpha:
            direction = "positive"
        elif o.p_lower <= alpha:
            direction = "negative"
        else:
            direction = ""
        rows.append(
            {
                "entity": entity,
                "n_events": o.n_events,
                "observed_wg": o.observed_wg,
                "null_mean": round6(o.null_mean),
                "excess": round6(o.excess),
                "share_gap_pct": round6(o.share_gap_pct),
                "p_upper": round6(o.p_upper),
                "p_lower": round6(o.p_lower),
                "significant_direction": direction,
            }
        )
    return rows


def _cmd_study(args) -> int:
    mapping, aliases, digests = _load_configs(args)
    l2m_path = _resolve_input(args, "l2m")
    digests["l2m"] = sha256_digest(l2m_path)
    events, rejects = ingest.parse_l2m(l2m_path, mapping, aliases)
    _write_rejects(args, rejects)
    seasons = _seasons(args)
    spec = analyses.StudySpec(
        args.kind,
        seasons=seasons,
        season_type=args.season_type,
        min_involvements=getattr(args, "min_involvements", 100),
        alpha=args.alpha,
    )
    config = SimConfig(
        replicates=args.replicates,
        master_seed=args.seed,
        smoothing_weight=args.smoothing_m,
        threads=args.threads,
    )
    outcomes = analyses.run_study(events, spec, config)
    if not outcomes:
        raise NoDataError("no qualifying entities in the selected window")
    summary = analyses.classify_significance(outcomes, args.alpha)
    meta = _metadata(
        args,
        args.kind,
        digests,
        seed=args.seed,
        replicates=args.replicates,
        smoothing_m=args.smoothing_m,
        seasons=f"{seasons[0]}-{seasons[1]}",
        season_type=args.season_type,
        alpha=args.alpha,
        min_involvements=spec.min_involvements if args.kind == analyses.PLAYER else "",
        rows_total=rejects.total_rows,
        rows_skipped=rejects.skipped,
    )
    blocks = {
        "meta_test_positive": _meta_block(summary.positive_meta, summary.positive),
        "meta_test_negative": _meta_block(summary.negative_meta, summary.negative),
    }
    columns = (
        "entity",
        "n_events",
        "observed_wg",
        "null_mean",
        "excess",
        "share_gap_pct",
        "p_upper",
        "p_lower",
        "significant_direction",
    )
    Report(meta, columns, _study_rows(outcomes, args.alpha), blocks=blocks).write(
        args.out, args.format
    )
    return 0


def _meta_block(meta: analyses.MetaTestResult, entities) -> dict:
    return {
        "m_tests": meta.m_tests,
        "r_significant": meta.r_significant,
        "alpha": meta.alpha,
        "p_all_false_positive": round6(meta.p_all_false_positive),
        "entities": ";".join(entities),
    }


def _cmd_race(args) -> int:
    mapping, _aliases, digests = _load_configs(args)
    paths = {name: _resolve_input(args, name) for name in ("tech_fouls", "box_scores", "demographics", "officials")}
    for name, path in paths.items():
        digests[name] = sha256_digest(path)
    fouls, rej_fouls = ingest.parse_tech_fouls(paths["tech_fouls"], mapping)
    box, rej_box = ingest.parse_box_scores(paths["box_scores"], mapping)
    demo, rej_demo = ingest.parse_demographics(paths["demographics"], mapping)
    officials, rej_off = ingest.parse_officials(paths["officials"], mapping)
    _write_rejects(args, rej_fouls, rej_box, rej_demo, rej_off)

    built = race.build_exposures(sorted(officials), box, demo, officials)
    if not built.exposures:
        raise NoDataError("no games retained for the race audit")
    summary = race.tech_rates(built.exposures, fouls, demo)
    call_rates = race.career_call_rates(built.exposures, fouls, demo)
    config = SimConfig(
        replicates=args.replicates, master_seed=args.seed, threads=args.threads
    )
    result = race.simulate_race_null(
        built.exposures, call_rates, summary.delta_tau, config, model=args.race_model
    )
    counts, edges = np.histogram(result.null_samples, bins=args.bins)
    meta = _metadata(
        args,
        "race",
        digests,
        seed=args.seed,
        replicates=args.replicates,
        race_model=args.race_model,
        games_total=built.n_games_total,
        games_dropped=len(built.dropped_games),
    )
    rows = [
        {"metric": "tau_same", "value": round6(summary.tau_same)},
        {"metric": "tau_diff", "value": round6(summary.tau_diff)},
        {"metric": "delta_tau", "value": round6(summary.delta_tau)},
        {"metric": "p_value", "value": round6(result.p_value)},
        {"metric": "n_fouls_used", "value": summary.n_fouls_used},
        {"metric": "n_fouls_excluded", "value": summary.n_fouls_excluded},
        {"metric": "same_exposure_minutes", "value": round6(summary.same_exposure_minutes)},
        {"metric": "diff_exposure_minutes", "value": round6(summary.diff_exposure_minutes)},
    ]
    table = ExtraTable(
        "null_histogram",
        ("bin_lo", "bin_hi", "count"),
        [
            [round6(edges[i]), round6(edges[i + 1]), int(counts[i])]
            for i in range(len(counts))
        ],
    )
    Report(meta, ("metric", "value"), rows, tables=[table]).write(args.out, args.format)
    return 0


def _cmd_power(args) -> int:
    levels = [float(x) for x in args.bias_levels.split(",") if x.strip() != ""]
    template = synth.default_synth_spec(
        n_games=args.games,
        events_mean=args.events_mean,
        dispersion=args.events_dispersion,
        seed=args.seed,
    )
    config = SimConfig(replicates=args.replicates, master_seed=0, threads=args.threads)
    points = synth.power_curve(template, levels, args.trials, alpha=args.alpha, sim_config=config)
    if args.emit_data:
        out_dir = Path(args.emit_data)
        out_dir.mkdir(parents=True, exist_ok=True)
        for point in points:
            spec = synth.sample_spec_for_level(template, point.bias)
            ingest.write_l2m_csv(synth.generate(spec).events, out_dir / f"synth_bias_{point.bias:g}.csv")
    meta = _metadata(
        args,
        "power",
        {},
        seed=args.seed,
        replicates=args.replicates,
        games=args.games,
        events_mean=args.events_mean,
        events_dispersion=args.events_dispersion,
        trials=args.trials,
        alpha=args.alpha,
    )
    rows = [
        {"bias": round6(p.bias), "detection_rate": round6(p.detection_rate), "trials": p.trials}
        for p in points
    ]
    Report(meta, ("bias", "detection_rate", "trials"), rows).write(args.out, args.format)
    return 0


if __name__ == "__main__":
    main()
