#!/usr/bin/env python3
"""Walkthrough: from a raw access log to a spliced demand series.

Parses the bundled sample log line by line, aggregates requests into
CPU demand per five-minute interval, then adds the flash-crowd hit
trace on top at two positions, exactly like the bundled scenario does.
"""

from pathlib import Path

from flashscale.traces import (
    aggregate_demand,
    load_hit_csv,
    load_trace,
    parse_clf_line,
    splice_slashdot,
)

DATA = Path(__file__).resolve().parents[1] / "data"

# --- one line, dissected ---------------------------------------------------
line = DATA.joinpath("nasa_sample.log").read_text(encoding="latin-1").splitlines()[0]
record = parse_clf_line(line)
print("raw line:   ", line)
print("parsed:     ", record)
print()

# --- the whole file --------------------------------------------------------
with open(DATA / "nasa_sample.log", "rb") as handle:
    records, skipped = load_trace(handle)
print(f"{len(records)} records parsed, {skipped} malformed lines skipped")

series = aggregate_demand(records, interval=300.0)
print(f"demand series: {len(series)} intervals of {series.interval:.0f}s "
      f"starting at epoch {series.start_time:.0f}")
print(f"  mean {series.demand.mean():.1f}, max {series.demand.max():.0f} CPU units/interval")
print()

# --- add the flash crowd ---------------------------------------------------
spike = load_hit_csv((DATA / "slashdot_hits.csv").read_text())
print(f"hit trace: {len(spike.hits)} samples at {spike.interval:.0f}s, "
      f"peak {spike.hits.max():.0f} hits/min, total {spike.hits.sum():.0f}")

spliced = series
for offset_hours in (88, 223):
    spliced = splice_slashdot(spliced, spike, offset_hours * 12, cost_per_hit=1.0)

print(f"after splicing at hours 88 and 223: max demand {spliced.demand.max():.0f} "
      f"(was {series.demand.max():.0f})")
print(f"total mass: base {series.demand.sum():.0f} + 2 x spike {spike.hits.sum():.0f} "
      f"= {spliced.demand.sum():.0f}")

# hour-by-hour view around the second event
print("\nhour  demand(sum)")
hourly = spliced.demand.reshape(-1, 12).sum(axis=1)
for hour in range(228, 240):
    bar = "#" * int(hourly[hour] / 400)
    print(f"{hour:4d}  {hourly[hour]:9.0f} {bar}")
