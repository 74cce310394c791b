#!/usr/bin/env python3
"""Materialize data/glass.arff for the reduced-scale benchmark test.

The glass identification data (214 patterns, 9 numeric attributes, 6
classes) is not vendored with this repository. This script builds the ARFF
file either from a local copy of the UCI ``glass.data`` file or by
downloading it, when network access is available:

    python3 scripts/fetch_glass.py                  # download from UCI
    python3 scripts/fetch_glass.py --from glass.data  # convert local copy

``glass.data`` rows look like ``Id,RI,Na,Mg,Al,Si,K,Ca,Ba,Fe,Type``; the Id
column is dropped and Type becomes the nominal class attribute.
"""

import argparse
import sys
import urllib.request
from pathlib import Path

UCI_URL = ("https://archive.ics.uci.edu/ml/machine-learning-databases/"
           "glass/glass.data")
FEATURES = ("RI", "Na", "Mg", "Al", "Si", "K", "Ca", "Ba", "Fe")
CLASSES = ("1", "2", "3", "5", "6", "7")  # class 4 has no instances


def to_arff(raw: str) -> str:
    lines = ["@relation glass"]
    for name in FEATURES:
        lines.append(f"@attribute {name} numeric")
    lines.append("@attribute class {" + ",".join(CLASSES) + "}")
    lines.append("@data")
    count = 0
    for row in raw.strip().splitlines():
        row = row.strip()
        if not row:
            continue
        fields = row.split(",")
        if len(fields) != len(FEATURES) + 2:
            raise SystemExit(f"unexpected row with {len(fields)} fields: "
                             f"{row!r}")
        label = fields[-1]
        if label not in CLASSES:
            raise SystemExit(f"unexpected class value {label!r}")
        lines.append(",".join(fields[1:-1] + [label]))
        count += 1
    if count != 214:
        raise SystemExit(f"expected 214 rows, got {count}")
    return "\n".join(lines) + "\n"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--from", dest="source", default=None,
                        help="local glass.data file instead of downloading")
    parser.add_argument("--url", default=UCI_URL)
    parser.add_argument("-o", "--out",
                        default=str(Path(__file__).resolve().parent.parent
                                    / "data" / "glass.arff"))
    args = parser.parse_args()
    if args.source:
        raw = Path(args.source).read_text(encoding="utf-8")
    else:
        print(f"downloading {args.url} ...")
        with urllib.request.urlopen(args.url, timeout=30) as response:
            raw = response.read().decode("utf-8")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(to_arff(raw), encoding="utf-8")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
