"""Deterministic synthetic Sahelian station records for tests and demos.

The generator only aims at plausible shapes (single summer rainy season,
Harmattan-cool winters); it reproduces no real station.
"""
from __future__ import annotations

import datetime as dt

import numpy as np

from .ingest import StationMeta, StationSeries, series_from_columns

SAHEL_SITE = StationMeta("SYNTH-SAHEL", 13.4, -6.15, 288.05)


def daily_dates(first_year: int, last_year: int) -> list:
    start = dt.date(first_year, 1, 1)
    n = (dt.date(last_year, 12, 31) - start).days + 1
    return [start + dt.timedelta(days=i) for i in range(n)]


def synthetic_station(first_year: int = 1990, last_year: int = 2019, seed: int = 0,
                      missing_fraction: float = 0.0, tmin_step: float = 0.0,
                      step_year: int = 2001, meta: StationMeta = SAHEL_SITE,
                      with_et0: bool = False) -> StationSeries:
    """Daily rain, temperature, humidity, wind and sunshine.

    Parameters
    ----------
    missing_fraction : float
        Share of (day, variable) cells blanked at random. Keep it small so
        every day-of-year pool retains observations for imputation.
    tmin_step : float
        Shift added to tmin from ``step_year`` on (a planted break).
    """
    rng = np.random.default_rng(seed)
    dates = daily_dates(first_year, last_year)
    n = len(dates)
    doy = np.array([d.timetuple().tm_yday for d in dates], dtype=float)
    years = np.array([d.year for d in dates])

    # year-to-year shift of the rainy-season centre and intensity
    uniq = np.unique(years)
    centre = dict(zip(uniq, rng.normal(212.0, 8.0, uniq.size)))
    scale = dict(zip(uniq, rng.normal(1.0, 0.15, uniq.size).clip(0.6, 1.5)))
    c = np.array([centre[y] for y in years])
    s = np.array([scale[y] for y in years])
    p_wet = 0.5 * np.exp(-(((doy - c) / 46.0) ** 2))
    wet = rng.random(n) < p_wet
    rain = np.where(wet, rng.gamma(0.9, 11.5, n) * s + 1.0, 0.0)
    rain = np.round(rain, 1)

    season = np.cos(2 * np.pi * (doy - 130) / 365.0)
    rainy = np.exp(-(((doy - 220) / 45.0) ** 2))
    tmin = 21.5 + 5.0 * season - 1.5 * rainy + rng.normal(0, 1.2, n)
    tmin = tmin + np.where(years >= step_year, tmin_step, 0.0)
    tmax = tmin + 13.0 - 5.0 * rainy + rng.normal(0, 1.0, n).clip(-3, 3)
    tmean = (tmin + tmax) / 2.0 + rng.normal(0, 0.3, n)
    tmean = np.clip(tmean, tmin, tmax)
    rhmin = np.clip(15.0 + 40.0 * rainy + rng.normal(0, 5, n), 2, 95)
    rhmax = np.clip(rhmin + 25.0 + 15.0 * rainy + rng.normal(0, 5, n), rhmin, 100)
    wind = np.clip(1.4 + 0.5 * np.cos(2 * np.pi * (doy - 60) / 365.0) + rng.normal(0, 0.4, n), 0.1, None)
    sunshine = np.clip(8.8 - 2.2 * rainy + rng.normal(0, 1.0, n), 0.0, 11.5)

    columns = {
        "rain": rain,
        "tmin": np.round(tmin, 2),
        "tmax": np.round(tmax, 2),
        "tmean": np.round(tmean, 2),
        "rhmin": np.round(rhmin, 1),
        "rhmax": np.round(rhmax, 1),
        "wind": np.round(wind, 2),
        "sunshine": np.round(sunshine, 1),
    }
    # rounding can break tmin <= tmean <= tmax by one ulp of the rounding grid
    columns["tmean"] = np.clip(columns["tmean"], columns["tmin"], columns["tmax"])
    columns["rhmax"] = np.maximum(columns["rhmax"], columns["rhmin"])
    if with_et0:
        columns["et0"] = np.round(np.clip(5.5 - 1.5 * rainy + rng.normal(0, 0.5, n), 0.5, None), 2)

    if missing_fraction > 0:
        for name in columns:
            blank = rng.random(n) < missing_fraction
            columns[name] = np.where(blank, np.nan, columns[name])
    return series_from_columns(dates, columns, meta)
