"""Daily reference evapotranspiration and its use as the bucket loss."""
import datetime as dt

import numpy as np

from agroseason import evapo, season
from agroseason.ingest import DailyRecord
from agroseason.synthetic import synthetic_station

# The FAO-56 worked example (Brussels, 6 July, wind measured at 10 m).
site = evapo.SiteParams(latitude=50.8, altitude=100.0, wind_height=10.0)
day = DailyRecord(dt.date(2001, 7, 6), tmin=12.3, tmax=21.5, rhmin=63.0, rhmax=84.0,
                  wind=10.0 / 3.6, sunshine=9.25)
terms = evapo.fao56_components(day.tmin, day.tmax, day.rhmin, day.rhmax, day.wind, day.sunshine, site, 187)
print("Brussels:", ", ".join(f"{k}={terms[k]:.2f}" for k in ("Ra", "Rs", "Rn", "es", "ea", "u2")))
print(f"ET0 = {evapo.fao56_et0(day, site):.2f} mm/day")

# A Sahelian station: ET0 peaks before the rains and drops in August.
series = synthetic_station(2010, 2012, seed=3)
et0 = evapo.et0_series(series, evapo.SiteParams.from_series(series))
months = np.array([d.month for d in et0.dates])
for month in (3, 5, 8, 11):
    print(f"  month {month:2d}: mean ET0 {np.nanmean(et0.values[months == month]):.1f} mm/day")

# Feeding ET0 to the bucket instead of the constant 5 mm/day.
rain = series.column("rain")
years = series.years
for year in (2010, 2011, 2012):
    mask = years == year
    fixed = season.detect_cessation_presao(rain[mask], year)
    daily = season.detect_cessation_presao(rain[mask], year, et0=et0.values[mask])
    print(f"{year}: bucket empties {fixed.cessation} at 5 mm/day, {daily.cessation} with ET0")
