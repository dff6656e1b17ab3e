"""Deterministic report serialization (CSV and JSON).

Reports carry a provenance-metadata section and a results section so
golden-file comparisons can diff results alone. Nothing time-dependent
is ever written: identical inputs and flags give identical bytes.

CSV dialect: comma, UTF-8, LF line endings, strings quoted; metadata and
key/value blocks ride on '#'-prefixed comment lines, extra tables follow
a '# table:<name>' marker line.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence


def sha256_digest(path: str | Path) -> str:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return f"sha256:{digest}"


@dataclass
class ExtraTable:
    name: str
    columns: Sequence[str]
    rows: list[Sequence[object]]


@dataclass
class Report:
    metadata: dict[str, object]
    columns: Sequence[str]
    results: list[dict[str, object]]
    blocks: dict[str, Mapping[str, object]] = field(default_factory=dict)
    tables: list[ExtraTable] = field(default_factory=list)

    def to_json_bytes(self) -> bytes:
        doc: dict[str, object] = {"metadata": self.metadata, "results": self.results}
        for name, block in self.blocks.items():
            doc[name] = dict(block)
        for table in self.tables:
            doc[table.name] = {
                "columns": list(table.columns),
                "rows": [list(row) for row in table.rows],
            }
        return (json.dumps(doc, indent=2, allow_nan=False) + "\n").encode("utf-8")

    def to_csv_bytes(self) -> bytes:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}={_plain(value)}\n")
        writer = csv.writer(buf, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
        writer.writerow(list(self.columns))
        for row in self.results:
            writer.writerow([_cell(row.get(col)) for col in self.columns])
        for name, block in self.blocks.items():
            pairs = " ".join(f"{k}={_plain(v)}" for k, v in block.items())
            buf.write(f"# {name}: {pairs}\n")
        for table in self.tables:
            buf.write(f"# table:{table.name}\n")
            writer.writerow(list(table.columns))
            for row in table.rows:
                writer.writerow([_cell(v) for v in row])
        return buf.getvalue().encode("utf-8")

    def write(self, out: str | Path, fmt: str) -> None:
        payload = self.to_json_bytes() if fmt == "json" else self.to_csv_bytes()
        if str(out) == "-":
            sys.stdout.write(payload.decode("utf-8"))
        else:
            Path(out).write_bytes(payload)


def _plain(value: object) -> str:
    if isinstance(value, dict):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def _cell(value: object):
    # None stays an empty quoted cell; undefined is never coerced to 0 or 1.
    if value is None:
        return ""
    return value


def round6(value: float) -> float:
    return round(float(value), 6)
