"""Onset, cessation and length of the rainy season, year by year."""
import numpy as np

from agroseason import season
from agroseason.synthetic import synthetic_station

series = synthetic_station(1990, 2019, seed=7)
params = season.SeasonParams()  # 20 mm in 3 days after May 1, 70 mm bucket, ...
markers = season.season_summary(series, params)

print("year  onset   end(S)  end(P)  length(S)  false starts")
for m in markers:
    def fmt(d):
        return d.strftime("%b %d") if d else "  --  "
    print(f"{m.year}  {fmt(m.onset)}  {fmt(m.cessation_siva)}  {fmt(m.cessation_presao)}  "
          f"{m.length_siva if m.length_siva is not None else '--':>9}  {len(m.false_start_dates)}")

onsets = [season.day_of_year(m.onset) for m in markers if m.onset]
lengths = [m.length_siva for m in markers if m.length_siva is not None]
print(f"\nmean onset {season.doy_to_date(np.mean(onsets)):%b %d}, mean length {np.mean(lengths):.0f} days")

# The sowing-risk view: by which date has the season started in 3 years out of 4?
risk = season.onset_risk_quantiles(onsets)
for level, doy in risk.quantiles.items():
    print(f"  {level:.0%} of onsets on or before {season.doy_to_date(doy):%b %d}")
june15 = 166  # day of year in a common year
print(f"share of years starting after Jun 15: {risk.exceedance(june15):.0%}")

# A stricter onset rule can only delay the season.
strict = season.SeasonParams(onset_accum_mm=30.0)
later = sum(1 for a, b in zip(markers, season.season_summary(series, strict))
            if a.onset and b.onset and b.onset > a.onset)
print(f"30 mm rule delays onset in {later} of {len(markers)} years")
