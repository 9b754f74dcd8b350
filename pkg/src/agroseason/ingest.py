"""Daily station records: parsing, validation, imputation and aggregation.

Missing observations are ``None`` on :class:`DailyRecord`; array accessors
such as :meth:`StationSeries.column` return ``float`` arrays with ``NaN`` in
their place.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DataError, ImputationError, ParseError, UsageError

VARIABLES = ("rain", "tmin", "tmax", "tmean", "rhmin", "rhmax", "wind", "sunshine", "et0")

# (lower, upper) inclusive bounds; None means unbounded
VALUE_RANGES = {
    "rain": (0.0, None),
    "tmin": (None, None),
    "tmax": (None, None),
    "tmean": (None, None),
    "rhmin": (0.0, 100.0),
    "rhmax": (0.0, 100.0),
    "wind": (0.0, None),
    "sunshine": (0.0, 24.0),
    "et0": (0.0, None),
}

MISSING_TOKENS = frozenset({"", "na"})

# pairs that must satisfy lo <= hi on the same day
_ORDERED_PAIRS = (("tmin", "tmax"), ("rhmin", "rhmax"), ("tmin", "tmean"), ("tmean", "tmax"))


@dataclass(frozen=True)
class DailyRecord:
    """Observations for one calendar day. ``None`` marks a missing value."""

    date: dt.date
    rain: Optional[float] = None
    tmin: Optional[float] = None
    tmax: Optional[float] = None
    tmean: Optional[float] = None
    rhmin: Optional[float] = None
    rhmax: Optional[float] = None
    wind: Optional[float] = None
    sunshine: Optional[float] = None
    et0: Optional[float] = None

    def __post_init__(self):
        for name in VARIABLES:
            value = getattr(self, name)
            if value is None:
                continue
            if not math.isfinite(value):
                raise DataError(f"{self.date}: {name} is not finite ({value!r})")
            lo, hi = VALUE_RANGES[name]
            if (lo is not None and value < lo) or (hi is not None and value > hi):
                raise DataError(f"{self.date}: {name}={value} outside allowed range [{lo}, {hi}]")
        for lo_name, hi_name in _ORDERED_PAIRS:
            lo, hi = getattr(self, lo_name), getattr(self, hi_name)
            if lo is not None and hi is not None and lo > hi:
                raise DataError(f"{self.date}: {lo_name}={lo} exceeds {hi_name}={hi}")

    def get(self, variable: str) -> Optional[float]:
        return getattr(self, variable)


@dataclass(frozen=True)
class StationMeta:
    station_id: str = ""
    latitude: Optional[float] = None
    longitude: Optional[float] = None
    altitude: Optional[float] = None


@dataclass(frozen=True)
class StationSeries:
    """Contiguous, date-ordered daily records for one station.

    ``variables`` lists the columns actually supplied by the source; the
    remaining :data:`VARIABLES` are all-missing and are skipped by imputation
    and reporting.
    """

    station_id: str
    latitude: Optional[float]
    longitude: Optional[float]
    altitude: Optional[float]
    records: tuple
    variables: tuple = ("rain",)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "variables", tuple(v for v in VARIABLES if v in self.variables))
        one_day = dt.timedelta(days=1)
        for prev, cur in zip(self.records, self.records[1:]):
            if cur.date <= prev.date:
                raise DataError(f"records not strictly increasing at {cur.date}")
            if cur.date - prev.date != one_day:
                raise DataError(f"gap in records between {prev.date} and {cur.date}")

    @property
    def meta(self) -> StationMeta:
        return StationMeta(self.station_id, self.latitude, self.longitude, self.altitude)

    @property
    def period(self):
        """(first year, last year), or None for an empty series."""
        if not self.records:
            return None
        return self.records[0].date.year, self.records[-1].date.year

    @cached_property
    def dates(self) -> tuple:
        return tuple(r.date for r in self.records)

    @cached_property
    def _columns(self) -> dict:
        cols = {}
        for name in VARIABLES:
            cols[name] = np.array(
                [np.nan if r.get(name) is None else r.get(name) for r in self.records], dtype=float
            )
        return cols

    def column(self, variable: str) -> np.ndarray:
        """Values of ``variable`` as a float array with NaN for missing days."""
        _check_variable(variable)
        return self._columns[variable].copy()

    @cached_property
    def years(self) -> np.ndarray:
        return np.array([d.year for d in self.dates], dtype=int)

    @cached_property
    def months(self) -> np.ndarray:
        return np.array([d.month for d in self.dates], dtype=int)

    def year_values(self, variable: str, year: int) -> np.ndarray:
        """Daily values of one calendar year, Jan 1 first."""
        return self.column(variable)[self.years == year]

    def full_years(self) -> list:
        """Years covered from Jan 1 through Dec 31."""
        if not self.records:
            return []
        first, last = self.records[0].date, self.records[-1].date
        start = first.year if (first.month, first.day) == (1, 1) else first.year + 1
        stop = last.year if (last.month, last.day) == (12, 31) else last.year - 1
        return list(range(start, stop + 1))

    def n_missing(self, variable: str) -> int:
        return int(np.isnan(self._columns[variable]).sum())


class PeriodValue(NamedTuple):
    key: str
    value: Optional[float]
    count: int


@dataclass(frozen=True)
class AggregatedSeries:
    variable: str
    period_kind: str
    statistic: str
    points: tuple

    @property
    def keys(self) -> list:
        return [p.key for p in self.points]

    @property
    def values(self) -> np.ndarray:
        return np.array([np.nan if p.value is None else p.value for p in self.points], dtype=float)


@dataclass(frozen=True)
class Histogram:
    variable: str
    bin_edges: tuple
    counts: tuple
    overflow: int = 0


class MonthSummary(NamedTuple):
    month: int
    n: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float


class ImputedValue(NamedTuple):
    date: dt.date
    variable: str
    value: float
    adjusted: bool = False


@dataclass(frozen=True)
class ImputationReport:
    """Every value written by :func:`impute_missing`.

    ``adjusted`` entries were moved off the climatological mean to keep the
    day's ``tmin <= tmean <= tmax`` / ``rhmin <= rhmax`` ordering.
    """

    imputed: tuple = ()

    def __len__(self):
        return len(self.imputed)

    def counts(self) -> dict:
        out = {}
        for item in self.imputed:
            out[item.variable] = out.get(item.variable, 0) + 1
        return out

    def dates_for(self, variable: str) -> set:
        return {i.date for i in self.imputed if i.variable == variable}


def _check_variable(variable):
    if variable not in VARIABLES:
        raise UsageError(f"unknown variable {variable!r}; expected one of {', '.join(VARIABLES)}")


# ----------------------------------------------------------------------------
# CSV / JSON I/O
# ----------------------------------------------------------------------------

def _text_stream(stream):
    if isinstance(stream, io.TextIOBase):
        return stream
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    return io.TextIOWrapper(stream, encoding="utf-8", newline="")


def _parse_value(text: str) -> Optional[float]:
    text = text.strip()
    if text.lower() in MISSING_TOKENS:
        return None
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def parse_daily_csv(stream, schema: Optional[Mapping[str, str]] = None,
                    station: Optional[StationMeta] = None) -> StationSeries:
    """Read a daily CSV into a contiguous :class:`StationSeries`.

    Parameters
    ----------
    stream : binary or text file object, or bytes
        UTF-8 CSV with a header row.
    schema : mapping, optional
        Logical field name (``"date"``, ``"rain"``, ...) to CSV column name.
        Fields not listed are looked up under their own name.
    station : StationMeta, optional
        Station metadata, usually from :func:`load_station_json`.

    Returns
    -------
    StationSeries
        Records for every day between the first and last date; days absent
        from the file become all-missing records. When the file has ``tmin``
        and ``tmax`` but no ``tmean`` column, ``tmean`` is their midpoint.

    Raises
    ------
    ParseError
        Malformed CSV, missing date/rain column or unparseable date.
    DataError
        Duplicate date or a value outside its allowed range.
    """
    schema = dict(schema or {})
    station = station or StationMeta()
    reader = csv.reader(_text_stream(stream), strict=True)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input, header row expected", line=1) from None
    except csv.Error as exc:
        raise ParseError(str(exc), line=reader.line_num) from None
    header = [h.strip().lstrip("﻿") for h in header]
    index = {}
    for logical in ("date",) + VARIABLES:
        name = schema.get(logical, logical)
        if name in header:
            index[logical] = header.index(name)
    for required in ("date", "rain"):
        if required not in index:
            raise ParseError(f"no {schema.get(required, required)!r} column in header", line=1)
    present = [v for v in VARIABLES if v in index]
    derive_tmean = "tmean" not in index and "tmin" in index and "tmax" in index

    rows = {}
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raise ParseError(str(exc), line=reader.line_num) from None
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", line=line)
        try:
            day = dt.date.fromisoformat(row[index["date"]].strip())
        except ValueError:
            raise ParseError(f"unparseable date {row[index['date']]!r}", line=line) from None
        if day in rows:
            raise DataError(f"line {line}: duplicate date {day}")
        values = {v: _parse_value(row[index[v]]) for v in present}
        if derive_tmean and values["tmin"] is not None and values["tmax"] is not None:
            values["tmean"] = (values["tmin"] + values["tmax"]) / 2.0
        try:
            rows[day] = DailyRecord(day, **values)
        except DataError as exc:
            raise DataError(f"line {line}: {exc}") from None

    if derive_tmean:
        present.append("tmean")
    records = []
    if rows:
        day, last = min(rows), max(rows)
        one = dt.timedelta(days=1)
        while day <= last:
            records.append(rows.get(day) or DailyRecord(day))
            day += one
    return StationSeries(station.station_id, station.latitude, station.longitude,
                         station.altitude, records, tuple(present))


def read_daily_csv(path, schema=None, station=None) -> StationSeries:
    with open(path, "rb") as fh:
        return parse_daily_csv(fh, schema=schema, station=station)


def write_daily_csv(series: StationSeries, stream) -> None:
    """Serialize ``series`` in the input CSV format (text stream).

    Floats are written with ``repr`` so that parsing the output reproduces
    the series exactly.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("date",) + series.variables)
    for rec in series.records:
        row = [rec.date.isoformat()]
        for v in series.variables:
            value = rec.get(v)
            row.append("" if value is None else repr(float(value)))
        writer.writerow(row)


def load_station_json(source) -> StationMeta:
    """Read the ``{station_id, latitude, longitude, altitude}`` sidecar."""
    if hasattr(source, "read"):
        payload = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    if not isinstance(payload, dict):
        raise DataError("station metadata must be a JSON object")

    def _num(key):
        value = payload.get(key)
        if value is None:
            return None
        try:
            return float(value)
        except (TypeError, ValueError):
            raise DataError(f"station {key} must be numeric, got {value!r}") from None

    lat = _num("latitude")
    if lat is not None and not -90.0 <= lat <= 90.0:
        raise DataError(f"station latitude {lat} outside [-90, 90]")
    return StationMeta(str(payload.get("station_id", "")), lat, _num("longitude"), _num("altitude"))


def series_from_columns(dates: Sequence[dt.date], columns: Mapping[str, Iterable],
                        meta: Optional[StationMeta] = None) -> StationSeries:
    """Build a series from parallel arrays; NaN/None become missing values."""
    meta = meta or StationMeta()
    names = [v for v in VARIABLES if v in columns]
    for name in columns:
        _check_variable(name)
    arrays = {name: list(columns[name]) for name in names}
    records = []
    for i, day in enumerate(dates):
        kwargs = {}
        for name in names:
            value = arrays[name][i]
            if value is not None and not (isinstance(value, float) and math.isnan(value)):
                kwargs[name] = float(value)
        records.append(DailyRecord(day, **kwargs))
    return StationSeries(meta.station_id, meta.latitude, meta.longitude, meta.altitude,
                         records, tuple(names))


def with_column(series: StationSeries, variable: str, values) -> StationSeries:
    """Copy of ``series`` with one column replaced (NaN = missing)."""
    _check_variable(variable)
    values = np.asarray(values, dtype=float)
    if values.shape != (len(series.records),):
        raise UsageError("column length does not match the series")
    records = [
        replace(rec, **{variable: None if np.isnan(v) else float(v)})
        for rec, v in zip(series.records, values)
    ]
    variables = tuple(set(series.variables) | {variable})
    return replace(series, records=records, variables=variables)


# ----------------------------------------------------------------------------
# Imputation
# ----------------------------------------------------------------------------

def day_of_year_key(day: dt.date) -> int:
    """Climatology pool index 1..365; Feb 29 shares the Feb 28 pool."""
    if day.month == 2 and day.day == 29:
        day = day.replace(day=28)
    return dt.date(2001, day.month, day.day).timetuple().tm_yday


def _pool_label(key: int) -> str:
    return (dt.date(2001, 1, 1) + dt.timedelta(days=int(key) - 1)).strftime("%m-%d")


def impute_missing(series: StationSeries):
    """Fill missing values with the same-day-of-year mean over all years.

    Returns
    -------
    (StationSeries, ImputationReport)

    Raises
    ------
    ImputationError
        If some missing value's (variable, day-of-year) pool has no
        observation in any year.
    """
    keys = np.array([day_of_year_key(d) for d in series.dates], dtype=int)
    filled = {}
    imputed_mask = {}
    for name in series.variables:
        col = series.column(name)
        missing = np.isnan(col)
        imputed_mask[name] = missing
        if not missing.any():
            filled[name] = col
            continue
        ok = ~missing
        sums = np.bincount(keys[ok], weights=col[ok], minlength=367)
        counts = np.bincount(keys[ok], minlength=367)
        need = np.unique(keys[missing])
        empty = need[counts[need] == 0]
        if empty.size:
            labels = ", ".join(_pool_label(k) for k in empty[:5])
            raise ImputationError(f"cannot impute {name}: no observation in any year for day(s) {labels}")
        climatology = np.divide(sums, counts, out=np.full(367, np.nan), where=counts > 0)
        col = col.copy()
        col[missing] = climatology[keys[missing]]
        filled[name] = col

    adjusted = {name: np.zeros(len(series.records), dtype=bool) for name in filled}
    for _ in range(2):
        for lo_name, hi_name in _ORDERED_PAIRS:
            if lo_name not in filled or hi_name not in filled:
                continue
            lo, hi = filled[lo_name], filled[hi_name]
            lo_imp, hi_imp = imputed_mask[lo_name], imputed_mask[hi_name]
            bad = lo > hi
            if not bad.any():
                continue
            both = bad & lo_imp & hi_imp
            mid = (lo + hi) / 2.0
            only_lo = bad & lo_imp & ~hi_imp
            only_hi = bad & hi_imp & ~lo_imp
            lo[both] = hi[both] = mid[both]
            lo[only_lo] = hi[only_lo]
            hi[only_hi] = lo[only_hi]
            adjusted[lo_name] |= both | only_lo
            adjusted[hi_name] |= both | only_hi

    if not any(m.any() for m in imputed_mask.values()):
        return series, ImputationReport()

    records = []
    report = []
    for i, rec in enumerate(series.records):
        changes = {}
        for name in series.variables:
            if imputed_mask[name][i]:
                value = float(filled[name][i])
                changes[name] = value
                report.append(ImputedValue(rec.date, name, value, bool(adjusted[name][i])))
        records.append(replace(rec, **changes) if changes else rec)
    return replace(series, records=records), ImputationReport(tuple(report))


# ----------------------------------------------------------------------------
# Aggregation and distribution summaries
# ----------------------------------------------------------------------------

_STATISTICS = {
    "sum": np.sum,
    "mean": np.mean,
    "max": np.max,
    "min": np.min,
}


def aggregate(series: StationSeries, variable: str, period_kind: str, statistic: str) -> AggregatedSeries:
    """Per-month or per-year statistic over the non-missing days.

    A period without any observation yields ``value=None`` and ``count=0``.
    """
    _check_variable(variable)
    if period_kind not in ("monthly", "annual"):
        raise UsageError(f"period_kind must be 'monthly' or 'annual', got {period_kind!r}")
    if statistic not in _STATISTICS:
        raise UsageError(f"statistic must be one of {', '.join(_STATISTICS)}, got {statistic!r}")
    func = _STATISTICS[statistic]
    col = series.column(variable)
    if period_kind == "annual":
        groups = series.years
        labels = [(y, f"{y:04d}") for y in np.unique(groups)]
        select = lambda y: groups == y  # noqa: E731
    else:
        groups = series.years * 100 + series.months
        labels = [(g, f"{g // 100:04d}-{g % 100:02d}") for g in np.unique(groups)]
        select = lambda g: groups == g  # noqa: E731
    points = []
    for group, key in labels:
        values = col[select(group)]
        values = values[~np.isnan(values)]
        if values.size == 0:
            points.append(PeriodValue(key, None, 0))
        else:
            points.append(PeriodValue(key, float(func(values)), int(values.size)))
    return AggregatedSeries(variable, period_kind, statistic, tuple(points))


def default_statistic(variable: str) -> str:
    """Monthly/annual totals for fluxes, means for state variables."""
    return "sum" if variable in ("rain", "et0") else "mean"


def six_number_summary(values) -> Optional[tuple]:
    values = np.sort(np.asarray(values, dtype=float))
    values = values[~np.isnan(values)]
    if values.size == 0:
        return None
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    return (int(values.size), float(values[0]), float(q1), float(med), float(q3),
            float(values[-1]), float(values.mean()))


def regime(series: StationSeries, variable: str, statistic: Optional[str] = "auto") -> tuple:
    """Distribution of ``variable`` for each calendar month, pooled over years.

    Parameters
    ----------
    statistic : {"auto", "sum", "mean", "max", None}
        Each (year, month) is first reduced with this statistic and the
        resulting per-year values are pooled by month. ``"auto"`` uses monthly
        totals for rain and ET0 and monthly means otherwise. ``None`` pools
        the raw daily values instead.

    Returns
    -------
    tuple of 12 entries (January first), each a :class:`MonthSummary` or
    ``None`` for a month without data. Quartiles use linear interpolation.
    """
    _check_variable(variable)
    if statistic == "auto":
        statistic = default_statistic(variable)
    if statistic is None:
        col = series.column(variable)
        pools = [col[series.months == m] for m in range(1, 13)]
    else:
        agg = aggregate(series, variable, "monthly", statistic)
        month_of = np.array([int(p.key[5:]) for p in agg.points], dtype=int)
        vals = agg.values
        pools = [vals[month_of == m] for m in range(1, 13)]
    out = []
    for month, pool in enumerate(pools, start=1):
        summary = six_number_summary(pool)
        out.append(None if summary is None else MonthSummary(month, *summary))
    return tuple(out)


def occurrence_histogram(series_or_values, variable: Optional[str] = None,
                         bin_edges: Sequence[float] = (), exclude_below: Optional[float] = None) -> Histogram:
    """Frequency of daily values per bin.

    Bins are closed on the left and open on the right except the last, which
    is closed. Values outside ``[bin_edges[0], bin_edges[-1]]`` are counted in
    ``overflow`` rather than dropped silently. ``exclude_below`` drops values
    below a threshold before binning (e.g. dry days for rainfall).
    """
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise UsageError("bin_edges must be strictly ascending with at least 2 edges")
    if isinstance(series_or_values, StationSeries):
        values = series_or_values.column(variable)
    else:
        values = np.asarray(series_or_values, dtype=float)
    values = values[~np.isnan(values)]
    if exclude_below is not None:
        values = values[values >= exclude_below]
    inside = (values >= edges[0]) & (values <= edges[-1])
    counts, _ = np.histogram(values[inside], bins=edges)
    return Histogram(variable or "", tuple(float(e) for e in edges),
                     tuple(int(c) for c in counts), int((~inside).sum()))
