"""Download a raw CSV (typically the public L2M grade archive) into a data dir.

The grade ledgers are maintained at https://github.com/atlhawksfanatic/L2M;
point --url at the combined CSV in your clone or at the matching
raw.githubusercontent.com path (the file layout there changes occasionally,
so check the repository if the default 404s). Pair the download with a
mapping.json (see configs/mapping.example.json) bound to that file's
column names.

Usage: python scripts/fetch_l2m.py --url <raw-csv-url> [--dest data/l2m.csv]
"""

from __future__ import annotations

import argparse
import sys
import urllib.request
from pathlib import Path

DEFAULT_URL = "https://raw.githubusercontent.com/atlhawksfanatic/L2M/master/1-tidy/L2M/L2M.csv"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--url", default=DEFAULT_URL)
    parser.add_argument("--dest", default="data/l2m.csv")
    args = parser.parse_args()
    dest = Path(args.dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    print(f"fetching {args.url}")
    try:
        with urllib.request.urlopen(args.url) as response:
            dest.write_bytes(response.read())
    except OSError as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        print("check the repository layout and pass --url explicitly", file=sys.stderr)
        return 1
    print(f"wrote {dest} ({dest.stat().st_size} bytes)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
