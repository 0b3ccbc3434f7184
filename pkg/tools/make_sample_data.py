#!/usr/bin/env python3
"""Regenerate the bundled sample traces under data/.

Everything here is synthetic but format-faithful:

* ``nasa_sample.log`` is 10,000 lines of Common Log Format traffic in
  the style of the public NASA Kennedy Space Center WWW logs
  (ita.ee.lbl.gov/html/contrib/NASA-HTTP.html): 9,970 well-formed
  request lines spanning 276 hours from 01/Aug/1995 00:00:00 -0400
  with a diurnal rate profile, plus 30 deliberately malformed lines so
  parser skip accounting is exercised.
* ``slashdot_hits.csv`` is a 24-hour hits-per-minute trace shaped like
  a classic flash-crowd event (quiet morning, steep ramp, plateau,
  exponential decay with an aftershock bump), in the style of the
  hits-versus-time data published for the July 26 2000 AUUG/LinuxSA
  InstallFest posting.

The generator is fully seeded; running it twice produces byte-identical
files. Real traces can be substituted by pointing a scenario file at
them.
"""

from __future__ import annotations

import calendar
import math
from pathlib import Path

import numpy as np

SEED = 19950801
TOTAL_LINES = 10_000
MALFORMED_LINES = 30
HOURS = 276
START_EPOCH_UTC = calendar.timegm((1995, 8, 1, 4, 0, 0)) - 0  # 00:00:00 -0400

MONTHS = ["Jan", "Feb", "Mar", "Apr", "May", "Jun",
          "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"]

PATHS = [
    ("/shuttle/countdown/", 0.09),
    ("/shuttle/missions/sts-70/mission-sts-70.html", 0.07),
    ("/shuttle/missions/sts-71/images/images.html", 0.06),
    ("/shuttle/missions/missions.html", 0.05),
    ("/history/apollo/apollo-13/apollo-13.html", 0.05),
    ("/history/apollo/apollo.html", 0.04),
    ("/images/ksclogo-medium.gif", 0.10),
    ("/images/NASA-logosmall.gif", 0.10),
    ("/images/MOSAIC-logosmall.gif", 0.06),
    ("/images/launch-logo.gif", 0.05),
    ("/icons/menu.xbm", 0.04),
    ("/icons/blank.xbm", 0.04),
    ("/htbin/cdt_main.pl", 0.04),
    ("/cgi-bin/imagemap/countdown?99,176", 0.03),
    ("/facilities/lc39a.html", 0.03),
    ("/ksc.html", 0.08),
    ("/whats-new.html", 0.03),
    ("/shuttle/technology/sts-newsref/stsref-toc.html", 0.04),
]

MALFORMED_SAMPLES = [
    "garbage line without brackets",
    'host17.example.net - - [03/Aug/1995:11:22',
    'dial4.isp2.example.net - - [02/Aug/1995:09:15:02 -0400] "GET /ksc.html HTTP/1.0" 2xx 440',
    '- -',
    'corrupt \x00\x7f\xfe bytes here',
    'client2.campus.example.edu - - [04/Aug/1995:16:40:11 -0400] "GET /images/ksclogo-medium.gif HTTP/1.0" 200 notanumber',
    'spider.example.org - - [05/Aug/1995:23:59:61 -0400] "GET / HTTP/1.0" 200 3985',
    'host3.example.net - - (06/Aug/1995:10:00:00 -0400) "GET / HTTP/1.0" 200 100',
    'web9.example.com - - [07/Aug/1995:12:00:00 -0400] "GET /unclosed 200 51',
    'node former entry overwritten 500',
]


def hourly_rates(rng: np.random.Generator) -> np.ndarray:
    """Diurnal request-per-hour profile, scaled to sum to the line budget."""
    weights = np.empty(HOURS)
    for h in range(HOURS):
        hod = h % 24
        dow = (h // 24 + 1) % 7  # Aug 1 1995 was a Tuesday
        day = 1.0 if dow not in (5, 6) else 0.78
        curve = 0.28 + math.sin(math.pi * ((hod - 5.5) % 24) / 15.0) ** 2 if 6 <= hod <= 21 else 0.28
        weights[h] = day * curve * rng.lognormal(mean=0.0, sigma=0.18)
    return weights / weights.sum()


def allocate_counts(weights: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder rounding so hourly counts sum exactly to total."""
    raw = weights * total
    counts = np.floor(raw).astype(int)
    remainder = total - counts.sum()
    order = np.argsort(raw - counts)[::-1]
    counts[order[:remainder]] += 1
    return counts


def make_hosts(rng: np.random.Generator) -> list[str]:
    hosts = []
    for i in range(60):
        hosts.append(f"dial{i:02d}.isp{i % 7}.example.net")
    for i in range(40):
        hosts.append(f"client{i:02d}.campus.example.edu")
    for i in range(30):
        hosts.append(f"host{i:02d}.example.com")
    for i in range(40):
        hosts.append(f"192.0.2.{rng.integers(1, 254)}")
    return hosts


def format_clf_time(epoch_utc: int) -> str:
    # Logged in local -0400 time, matching the historical trace.
    local = epoch_utc - 4 * 3600
    tm = __import__("time").gmtime(local)
    return (
        f"{tm.tm_mday:02d}/{MONTHS[tm.tm_mon - 1]}/{tm.tm_year}:"
        f"{tm.tm_hour:02d}:{tm.tm_min:02d}:{tm.tm_sec:02d} -0400"
    )


def make_nasa_log(rng: np.random.Generator) -> list[str]:
    n_valid = TOTAL_LINES - MALFORMED_LINES
    counts = allocate_counts(hourly_rates(rng), n_valid)
    hosts = make_hosts(rng)
    path_names = [p for p, _ in PATHS]
    path_probs = np.array([w for _, w in PATHS])
    path_probs = path_probs / path_probs.sum()

    lines: list[str] = []
    for hour, count in enumerate(counts):
        if count == 0:
            continue
        offsets = np.sort(rng.integers(0, 3600, size=count))
        for off in offsets:
            epoch = START_EPOCH_UTC + hour * 3600 + int(off)
            host = hosts[rng.integers(0, len(hosts))]
            path = path_names[rng.choice(len(path_names), p=path_probs)]
            method = rng.choice(["GET"] * 97 + ["HEAD"] * 2 + ["POST"])
            status = rng.choice([200] * 87 + [304] * 8 + [404] * 4 + [500])
            if status == 304:
                nbytes = "-"
            elif status == 404:
                nbytes = "-" if rng.random() < 0.5 else "0"
            else:
                nbytes = str(int(rng.lognormal(mean=7.4, sigma=1.3)) + 64)
            proto = "" if rng.random() < 0.012 else " HTTP/1.0"
            lines.append(
                f'{host} - - [{format_clf_time(epoch)}] '
                f'"{method} {path}{proto}" {status} {nbytes}'
            )

    # A few adjacent swaps: real multi-worker logs are not strictly ordered.
    for _ in range(20):
        i = int(rng.integers(1, len(lines) - 1))
        lines[i - 1], lines[i] = lines[i], lines[i - 1]

    # Sprinkle malformed lines at deterministic positions.
    positions = sorted(rng.choice(len(lines), size=MALFORMED_LINES, replace=False))
    for k, pos in enumerate(positions):
        lines.insert(pos + k, MALFORMED_SAMPLES[k % len(MALFORMED_SAMPLES)])
    assert len(lines) == TOTAL_LINES
    return lines


def make_slashdot_csv(rng: np.random.Generator) -> list[str]:
    minutes = 1440
    rows = ["time_seconds,hits"]
    for m in range(minutes):
        if m < 540:
            rate = 0.4
        elif m < 660:
            rate = 0.4 * (100.0 / 0.4) ** ((m - 540) / 120.0)  # exponential ramp
        elif m < 780:
            rate = 100.0
        elif m < 1000:
            rate = 100.0 * math.exp(-(m - 780) / 150.0)
            rate += 22.0 * math.exp(-(((m - 980) / 40.0) ** 2))  # aftershock
        else:
            # Attention dies off fast once the crowd moves on.
            rate = 100.0 * math.exp(-220.0 / 150.0) * math.exp(-(m - 1000) / 60.0)
            rate += 22.0 * math.exp(-(((m - 980) / 40.0) ** 2))
        hits = int(rng.poisson(max(rate, 0.4)))
        rows.append(f"{m * 60},{hits}")
    return rows


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "data"
    out_dir.mkdir(exist_ok=True)
    rng = np.random.default_rng(SEED)
    log_lines = make_nasa_log(rng)
    (out_dir / "nasa_sample.log").write_text("\n".join(log_lines) + "\n", encoding="latin-1")
    csv_rows = make_slashdot_csv(rng)
    (out_dir / "slashdot_hits.csv").write_text("\n".join(csv_rows) + "\n", encoding="ascii")
    print(f"wrote {len(log_lines)} log lines and {len(csv_rows) - 1} hit rows to {out_dir}")


if __name__ == "__main__":
    main()
