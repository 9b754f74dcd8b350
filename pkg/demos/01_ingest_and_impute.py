"""Reading a daily station file, filling gaps and summarising the regime.

Run with ``python3 demos/01_ingest_and_impute.py``.
"""
import io

import numpy as np

from agroseason import ingest
from agroseason.synthetic import synthetic_station

# A 30-year record with 2% of cells blanked, written out and parsed back the
# way a real station export would be.
gappy = synthetic_station(1990, 2019, seed=11, missing_fraction=0.02)
buf = io.StringIO()
ingest.write_daily_csv(gappy, buf)
series = ingest.parse_daily_csv(io.StringIO(buf.getvalue()), station=gappy.meta)
print(f"{len(series.records)} days, {series.period[0]} .. {series.period[1]}")
print("missing cells per variable:", {v: series.n_missing(v) for v in series.variables})

# Gaps are replaced by the mean of the same calendar day in the other years.
filled, report = ingest.impute_missing(series)
print("imputed:", report.counts())
print("clipped to keep tmin <= tmean <= tmax:", sum(v.adjusted for v in report.imputed))

# Annual rainfall totals and the monthly regime.
annual = ingest.aggregate(filled, "rain", "annual", "sum")
print(f"annual rain: mean {np.mean(annual.values):.0f} mm, "
      f"range {min(annual.values):.0f}-{max(annual.values):.0f} mm")

print("\nmonthly rain totals across years (median and quartiles, mm)")
for month in ingest.regime(filled, "rain"):
    if month is None:
        continue
    print(f"  {month.month:2d}  {month.q1:7.1f} {month.median:7.1f} {month.q3:7.1f}")

# How often does a rainy day bring 10-20 mm?
hist = ingest.occurrence_histogram(filled, "rain", [1, 5, 10, 20, 40, 80], exclude_below=1.0)
for lo, hi, count in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts):
    print(f"  [{lo:>4g}, {hi:>4g}) mm : {count}")
print(f"  >= {hist.bin_edges[-1]:g} mm: {hist.overflow}")
