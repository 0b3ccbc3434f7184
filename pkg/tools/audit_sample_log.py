#!/usr/bin/env python3
"""One-shot reference audit of data/nasa_sample.log.

Counts well-formed versus malformed lines with a single strict regular
expression, independently of the package parser. The counts printed by
this script are frozen into the test suite as the expected parse
outcome for the bundled excerpt.
"""

from __future__ import annotations

import re
import sys
from pathlib import Path

CLF = re.compile(
    r"^(?P<host>\S+) (?P<ident>\S+) (?P<user>\S+) "
    r"\[(?P<day>\d{2})/(?P<mon>Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Oct|Nov|Dec)"
    r"/(?P<year>\d{4}):(?P<hh>[01]\d|2[0-3]):(?P<mm>[0-5]\d):(?P<ss>[0-5]\d|60) "
    r"(?P<zone>[+-]\d{4})\] "
    r'"(?P<method>\S+) (?P<path>\S+)( (?P<proto>\S+))?" '
    r"(?P<status>[1-5]\d{2}) (?P<nbytes>\d+|-)"
    r"(\s.*)?$"
)


def main() -> int:
    path = Path(__file__).resolve().parents[1] / "data" / "nasa_sample.log"
    ok = bad = 0
    for line in path.read_text(encoding="latin-1").splitlines():
        if not line.strip():
            continue
        if CLF.match(line):
            ok += 1
        else:
            bad += 1
    print(f"lines={ok + bad} parsed={ok} malformed={bad}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
