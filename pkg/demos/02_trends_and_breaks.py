"""Trend and change-point tests on annual series.

A 2 deg C jump in night temperature is planted in 2005; the break test
should locate it and the trend test should see a warming series.
"""
from agroseason import ingest, stats
from agroseason.synthetic import synthetic_station

series = synthetic_station(1990, 2019, seed=5, tmin_step=2.0, step_year=2005)

for var in ("tmin", "rain"):
    agg = ingest.aggregate(series, var, "annual", ingest.default_statistic(var))
    mk = stats.mann_kendall(agg.values)
    sen = stats.sen_slope(agg.values)
    br = stats.pettitt(agg.values, keys=agg.keys)
    print(f"{var}:")
    print(f"  Mann-Kendall S={mk.s} z={mk.z:+.2f} p={mk.p_two_sided:.3g} "
          f"({'significant' if mk.significant(0.05) else 'not significant'} at 5%)")
    print(f"  Sen slope {10 * sen.slope:+.3f} per decade")
    print(f"  Pettitt K={br.k_stat} last year before break {br.break_date} p~{br.p_approx:.3g}; "
          f"mean {br.mean_before:.2f} -> {br.mean_after:.2f}")

# Standardised anomalies are what a bar chart of wet and dry years shows.
rain = ingest.aggregate(series, "rain", "annual", "sum")
anoms = stats.standardized_anomalies(rain.values)
print("\nwettest years:", [k for _, k in sorted(zip(anoms, rain.keys), reverse=True)[:3]])

# Normality of the annual totals, with Q-Q pairs ready to plot.
sw = stats.shapiro_wilk(rain.values)
print(f"Shapiro-Wilk W={sw.w:.3f} p={sw.p:.3f}")
for point in stats.qq_normal(rain.values)[:3]:
    print(f"  theoretical {point.theoretical:7.1f}  observed {point.observed:7.1f}")
