"""Dry spells inside the rainy season."""
import numpy as np

from agroseason import season
from agroseason.synthetic import synthetic_station

series = synthetic_station(1990, 2019, seed=7)
params = season.SeasonParams()
rain = series.column("rain")

catalogs = []
for m in season.season_summary(series, params):
    if m.onset is None or m.cessation_siva is None:
        continue
    year_rain = rain[series.years == m.year]
    catalogs.append(season.dry_spells(year_rain, m.year, params, "within-season",
                                      m.onset, m.cessation_siva))

lengths = np.concatenate([c.lengths for c in catalogs])
print(f"{lengths.size} within-season dry spells over {len(catalogs)} seasons")
print(f"share lasting 7 days or less: {season.spell_length_share(catalogs, 7):.0%}")
values, counts = np.unique(lengths, return_counts=True)
for v, c in zip(values[:10], counts[:10]):
    print(f"  {v:2d} days: {'#' * int(c // 4)} {c}")
print(f"longest: {lengths.max()} days")
