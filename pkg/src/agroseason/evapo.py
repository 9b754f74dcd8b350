"""FAO-56 Penman-Monteith reference evapotranspiration, daily time step.

Results are labelled "reference ET0 (FAO-56)". Radiation comes from sunshine
duration through the Angstrom relation; soil heat flux is taken as zero at
the daily step.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError, MissingInputError
from .ingest import DailyRecord, StationSeries

ET0_LABEL = "reference ET0 (FAO-56)"

SOLAR_CONSTANT = 0.0820  # MJ m-2 min-1
STEFAN_BOLTZMANN = 4.903e-9  # MJ K-4 m-2 day-1
REQUIRED_FIELDS = ("tmin", "tmax", "rhmin", "rhmax", "wind", "sunshine")


@dataclass(frozen=True)
class SiteParams:
    """Site constants for the daily ET0 computation.

    ``wind_height`` is the anemometer height in metres; values other than
    2 m are reduced to 2 m with the FAO-56 logarithmic profile.
    """

    latitude: float
    altitude: float = 0.0
    albedo: float = 0.23
    angstrom_a: float = 0.25
    angstrom_b: float = 0.50
    wind_height: float = 2.0

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise DataError(f"latitude {self.latitude} outside [-90, 90]")
        if not 0.0 <= self.albedo <= 1.0:
            raise DataError(f"albedo {self.albedo} outside [0, 1]")
        if self.wind_height <= 0.0:
            raise DataError("wind_height must be positive")

    @classmethod
    def from_series(cls, series: StationSeries, **kwargs) -> "SiteParams":
        if series.latitude is None:
            raise DataError("station latitude is required to compute ET0")
        return cls(series.latitude, series.altitude or 0.0, **kwargs)


def saturation_vapour_pressure(t):
    """kPa, for air temperature in deg C."""
    return 0.6108 * np.exp(17.27 * t / (t + 237.3))


def atmospheric_pressure(altitude):
    return 101.3 * ((293.0 - 0.0065 * altitude) / 293.0) ** 5.26


def wind_at_2m(speed, height):
    if height == 2.0:
        return speed
    return speed * 4.87 / math.log(67.8 * height - 5.42)


def extraterrestrial_radiation(latitude, day_of_year):
    """(Ra [MJ m-2 day-1], daylight hours N)."""
    phi = math.radians(latitude)
    dr = 1.0 + 0.033 * math.cos(2.0 * math.pi * day_of_year / 365.0)
    decl = 0.409 * math.sin(2.0 * math.pi * day_of_year / 365.0 - 1.39)
    # clipped for polar day/night
    ws = math.acos(max(-1.0, min(1.0, -math.tan(phi) * math.tan(decl))))
    ra = (24.0 * 60.0 / math.pi * SOLAR_CONSTANT * dr
          * (ws * math.sin(phi) * math.sin(decl) + math.cos(phi) * math.cos(decl) * math.sin(ws)))
    return max(ra, 0.0), 24.0 / math.pi * ws


def fao56_components(tmin, tmax, rhmin, rhmax, wind, sunshine, site: SiteParams, day_of_year: int) -> dict:
    """Intermediate terms of the daily computation, keyed by FAO-56 names."""
    tmean = (tmax + tmin) / 2.0
    pressure = atmospheric_pressure(site.altitude)
    gamma = 0.665e-3 * pressure
    e_tmax = saturation_vapour_pressure(tmax)
    e_tmin = saturation_vapour_pressure(tmin)
    es = (e_tmax + e_tmin) / 2.0
    ea = (e_tmin * rhmax / 100.0 + e_tmax * rhmin / 100.0) / 2.0
    delta = 4098.0 * saturation_vapour_pressure(tmean) / (tmean + 237.3) ** 2
    u2 = wind_at_2m(wind, site.wind_height)

    ra, daylength = extraterrestrial_radiation(site.latitude, day_of_year)
    ratio = min(sunshine / daylength, 1.0) if daylength > 0 else 0.0
    rs = (site.angstrom_a + site.angstrom_b * ratio) * ra
    rso = (0.75 + 2e-5 * site.altitude) * ra
    rns = (1.0 - site.albedo) * rs
    rel_shortwave = min(rs / rso, 1.0) if rso > 0 else 0.0
    rnl = (STEFAN_BOLTZMANN * ((tmax + 273.16) ** 4 + (tmin + 273.16) ** 4) / 2.0
           * (0.34 - 0.14 * math.sqrt(ea)) * (1.35 * rel_shortwave - 0.35))
    rn = rns - rnl
    g = 0.0
    numerator = 0.408 * delta * (rn - g) + gamma * 900.0 / (tmean + 273.0) * u2 * (es - ea)
    et0 = numerator / (delta + gamma * (1.0 + 0.34 * u2))
    return {
        "P": pressure, "gamma": gamma, "es": es, "ea": ea, "delta": delta, "u2": u2,
        "Ra": ra, "N": daylength, "Rs": rs, "Rso": rso, "Rns": rns, "Rnl": rnl, "Rn": rn,
        "et0": et0,
    }


def fao56_et0(record: DailyRecord, site: SiteParams, day_of_year: Optional[int] = None) -> float:
    """Daily reference ET0 in mm/day for one record.

    Raises
    ------
    MissingInputError
        One of tmin, tmax, rhmin, rhmax, wind, sunshine is missing.

    Negative results (possible on dark, saturated days) are clamped to 0
    with a warning.
    """
    missing = [f for f in REQUIRED_FIELDS if record.get(f) is None]
    if missing:
        raise MissingInputError(missing)
    if day_of_year is None:
        day_of_year = record.date.timetuple().tm_yday
    if not 1 <= day_of_year <= 366:
        raise DataError(f"day_of_year {day_of_year} outside [1, 366]")
    et0 = fao56_components(record.tmin, record.tmax, record.rhmin, record.rhmax,
                           record.wind, record.sunshine, site, day_of_year)["et0"]
    if et0 < 0.0:
        warnings.warn(f"{record.date}: negative ET0 {et0:.3f} mm clamped to 0", stacklevel=2)
        et0 = 0.0
    return float(et0)


@dataclass(frozen=True)
class Et0Series:
    """Daily ET0 with per-day provenance: ``"file"``, ``"computed"`` or ``"missing"``."""

    dates: tuple
    values: np.ndarray
    sources: tuple

    def coverage(self) -> dict:
        out = {"file": 0, "computed": 0, "missing": 0}
        for s in self.sources:
            out[s] += 1
        return out


def et0_series(series: StationSeries, site: Optional[SiteParams] = None) -> Et0Series:
    """ET0 for every day: the file value when present, else FAO-56 when computable."""
    values = np.full(len(series.records), np.nan)
    sources = []
    for i, rec in enumerate(series.records):
        if rec.et0 is not None:
            values[i] = rec.et0
            sources.append("file")
            continue
        if site is not None and all(rec.get(f) is not None for f in REQUIRED_FIELDS):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                values[i] = fao56_et0(rec, site)
            sources.append("computed")
        else:
            sources.append("missing")
    return Et0Series(series.dates, values, tuple(sources))
