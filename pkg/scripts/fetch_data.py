#!/usr/bin/env python3
"""Download and prepare the full datasets (run on a machine with network).

The library itself never touches the network; this script documents and
automates acquisition. It produces a data directory containing:

    Unihan_Readings.txt   kCantonese readings       (unicode.org, UniHan)
    Unihan_Variants.txt   simplified/traditional    (unicode.org, UniHan)
    ids.txt               decomposition rules       (CHISE IDS database)

Point LOGOTREE_UNIHAN_DIR at the output directory to enable the extended
acceptance tests, and pass the files to the CLI for full-scale runs.

Language-modeling corpora are not redistributable and must be obtained
separately:
  - CTB 5.1: LDC catalog LDC2005T01 (license required)
  - PKU / MSR / CITYU / AS: the Second International Chinese Word
    Segmentation Bakeoff distribution (SIGHAN 2005),
    http://sighan.cs.uchicago.edu/bakeoff2005/
  - CTB/PKU split lists: https://s3.eu-west-2.amazonaws.com/k-kawakami/seg.zip
Convert each corpus to plain UTF-8 text, one sentence per line, and feed it
to `logotree train-lm` / `eval-lm`.
"""

import argparse
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

UNIHAN_URL = "https://www.unicode.org/Public/UCD/latest/ucd/Unihan.zip"
# CHISE IDS database mirror (one file per Unicode block)
CHISE_BASE = "https://gitlab.chise.org/CHISE/ids/-/raw/master/"
CHISE_FILES = [
    "IDS-UCS-Basic.txt",
    "IDS-UCS-Ext-A.txt",
]


def fetch(url: str) -> bytes:
    print(f"fetching {url}")
    with urllib.request.urlopen(url) as resp:
        return resp.read()


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data/full", help="output directory")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    blob = fetch(UNIHAN_URL)
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        for name in ("Unihan_Readings.txt", "Unihan_Variants.txt"):
            (out / name).write_bytes(zf.read(name))
            print(f"wrote {out / name}")

    parts = []
    for name in CHISE_FILES:
        parts.append(fetch(CHISE_BASE + name).decode("utf-8"))
    (out / "ids.txt").write_text("\n".join(parts), encoding="utf-8")
    print(f"wrote {out / 'ids.txt'}")
    print(f"done; export LOGOTREE_UNIHAN_DIR={out.resolve()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
