"""Rainy-season onset, cessation, length, rainy days and dry spells.

All per-year functions take ``rain``: the daily rainfall of one calendar
year as an array whose element 0 is January 1, plus the ``year`` itself so
that array positions can be turned into dates.

Onset (Sivakumar)
    First wet day ``d`` on or after May 1 with at least 20 mm over
    ``d, d+1, d+2`` and no run of more than 7 dry days in the 30 days
    following ``d+2``. Candidates that fail the dry-run guard are kept as
    false starts.

Cessation (Sivakumar)
    Earliest day ``c`` on or after Sep 1 such that the next 20 days all have
    less than 5 mm.

Cessation (PRESAO)
    A 70 mm bucket, full on Sep 1, loses 5 mm (or that day's ET0) per day
    and gains the day's rain up to capacity; the season ends on the first
    day the bucket is empty.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import (DataError, InsufficientDataError, MissingValueError, ScopeError,
                     UsageError)
from .ingest import StationSeries

# absorbs float round-off in sums such as 6.7 + 6.7 + 6.6
_EPS = 1e-9


@dataclass(frozen=True)
class SeasonParams:
    onset_search_start: tuple = (5, 1)
    onset_accum_mm: float = 20.0
    onset_accum_days: int = 3
    onset_guard_window: int = 30
    max_dry_run: int = 7
    cessation_search_start: tuple = (9, 1)
    siva_cess_rain_mm: float = 5.0
    siva_cess_dry_days: int = 20
    presao_capacity_mm: float = 70.0
    presao_daily_loss_mm: float = 5.0
    # use the daily ET0 series instead of the constant loss when one is supplied
    presao_loss_from_et0: bool = False
    wet_day_mm: float = 1.0
    # guard window starts the day after the accumulation window; False starts it on the onset day
    guard_after_accumulation: bool = True
    # "full": bucket at capacity on the cessation search start; "onset": empty bucket filled from onset
    presao_init: str = "full"

    def __post_init__(self):
        object.__setattr__(self, "onset_search_start", tuple(self.onset_search_start))
        object.__setattr__(self, "cessation_search_start", tuple(self.cessation_search_start))
        positive = ("onset_accum_mm", "onset_accum_days", "onset_guard_window", "max_dry_run",
                    "siva_cess_rain_mm", "siva_cess_dry_days", "presao_capacity_mm",
                    "presao_daily_loss_mm", "wet_day_mm")
        for name in positive:
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be > 0")
        for name in ("onset_search_start", "cessation_search_start"):
            month, day = getattr(self, name)
            try:
                dt.date(2001, month, day)
            except ValueError:
                raise UsageError(f"{name}={getattr(self, name)} is not a valid month-day") from None
        if self.onset_search_start >= self.cessation_search_start:
            raise UsageError("onset search must start before cessation search")
        if self.presao_init not in ("full", "onset"):
            raise UsageError("presao_init must be 'full' or 'onset'")


class OnsetResult(NamedTuple):
    onset: Optional[dt.date]
    false_starts: tuple


class CessationResult(NamedTuple):
    """``flagged`` is True when the criterion was not met before the data ran out."""

    cessation: Optional[dt.date]
    flagged: bool


@dataclass(frozen=True)
class SeasonMarkers:
    year: int
    onset: Optional[dt.date]
    cessation_siva: Optional[dt.date]
    cessation_presao: Optional[dt.date]
    length_siva: Optional[int]
    length_presao: Optional[int]
    rainy_days_in_season: Optional[int]
    rainy_days_in_year: int
    false_start_dates: tuple = ()
    siva_flagged: bool = False
    presao_flagged: bool = False


class DrySpell(NamedTuple):
    start: dt.date
    length: int


@dataclass(frozen=True)
class DrySpellCatalog:
    spells: tuple
    scope: str

    @property
    def lengths(self) -> np.ndarray:
        return np.array([s.length for s in self.spells], dtype=int)


@dataclass
class WaterBalanceState:
    """Bucket storage in mm, kept within ``[0, capacity]``."""

    stock: float
    capacity: float

    def __post_init__(self):
        if not 0.0 <= self.stock <= self.capacity:
            raise DataError(f"stock {self.stock} outside [0, {self.capacity}]")

    def step(self, rain: float, loss: float) -> float:
        # loss first, then rain capped at capacity
        self.stock = min(self.capacity, max(0.0, self.stock - loss) + rain)
        return self.stock


def _index_of(year: int, month_day: tuple) -> int:
    return (dt.date(year, *month_day) - dt.date(year, 1, 1)).days


def _date_at(year: int, index: int) -> dt.date:
    return dt.date(year, 1, 1) + dt.timedelta(days=int(index))


def _year_rain(rain, year: int, start: int, what: str) -> np.ndarray:
    x = np.asarray(rain, dtype=float)
    if x.ndim != 1:
        raise UsageError(f"{what}: rain must be one-dimensional")
    if x.size <= start:
        raise InsufficientDataError(
            f"{what}: {year} slice has {x.size} days, search starts at day {start + 1}")
    if np.isnan(x[start:]).any():
        raise MissingValueError(f"{what}: missing rainfall in {year} after the search start; impute first")
    return x


def longest_dry_run(rain, wet_day_mm: float) -> int:
    longest = run = 0
    for value in rain:
        run = run + 1 if value < wet_day_mm else 0
        longest = max(longest, run)
    return longest


def detect_onset_sivakumar(rain: Sequence[float], year: int,
                           params: SeasonParams = SeasonParams()) -> OnsetResult:
    """Sivakumar onset for one year, with rejected candidates.

    A candidate day must itself be wet (``>= wet_day_mm``). The guard window
    is truncated at the end of the slice.
    """
    start = _index_of(year, params.onset_search_start)
    x = _year_rain(rain, year, start, "detect_onset_sivakumar")
    k = params.onset_accum_days
    false_starts = []
    for d in range(start, x.size - k + 1):
        if x[d] < params.wet_day_mm:
            continue
        if x[d:d + k].sum() < params.onset_accum_mm - _EPS:
            continue
        g0 = d + k if params.guard_after_accumulation else d
        guard = x[g0:g0 + params.onset_guard_window]
        if longest_dry_run(guard, params.wet_day_mm) > params.max_dry_run:
            false_starts.append(_date_at(year, d))
            continue
        return OnsetResult(_date_at(year, d), tuple(false_starts))
    return OnsetResult(None, tuple(false_starts))


def detect_cessation_sivakumar(rain: Sequence[float], year: int,
                               params: SeasonParams = SeasonParams(),
                               not_before: Optional[dt.date] = None) -> CessationResult:
    """Earliest ``c`` >= search start with ``rain < siva_cess_rain_mm`` on each of the next
    ``siva_cess_dry_days`` days. Undefined and flagged when no such run fits in the slice."""
    start = _index_of(year, params.cessation_search_start)
    if not_before is not None:
        start = max(start, (not_before - dt.date(year, 1, 1)).days)
    x = _year_rain(rain, year, start, "detect_cessation_sivakumar")
    n = params.siva_cess_dry_days
    heavy = x >= params.siva_cess_rain_mm
    for c in range(start, x.size - n):
        if not heavy[c + 1:c + 1 + n].any():
            return CessationResult(_date_at(year, c), False)
    return CessationResult(None, True)


def water_balance(rain: Sequence[float], loss, capacity: float, initial: float) -> np.ndarray:
    """End-of-day bucket storage for each day of ``rain``.

    ``loss`` is a scalar or a per-day array. Each day subtracts the loss
    (floored at 0) and then adds the rain (capped at ``capacity``).
    """
    rain = np.asarray(rain, dtype=float)
    losses = np.broadcast_to(np.asarray(loss, dtype=float), rain.shape)
    state = WaterBalanceState(float(initial), float(capacity))
    out = np.empty(rain.size)
    for i in range(rain.size):
        out[i] = state.step(float(rain[i]), float(losses[i]))
    return out


def detect_cessation_presao(rain: Sequence[float], year: int,
                            params: SeasonParams = SeasonParams(),
                            et0: Optional[Sequence[float]] = None,
                            onset: Optional[dt.date] = None) -> CessationResult:
    """PRESAO end of season: first day on or after the search start with an empty bucket.

    Parameters
    ----------
    et0 : array, optional
        Daily loss for the same year (element 0 = Jan 1). When omitted the
        constant ``presao_daily_loss_mm`` is used.
    onset : date, optional
        With ``presao_init="onset"`` the bucket starts empty on this date
        and is run forward; with ``"full"`` the bucket starts full on the
        later of the search start and ``onset``.
    """
    start = _index_of(year, params.cessation_search_start)
    x = _year_rain(rain, year, start, "detect_cessation_presao")
    if et0 is None:
        loss = np.full(x.size, params.presao_daily_loss_mm)
    else:
        loss = np.asarray(et0, dtype=float)
        if loss.shape != x.shape:
            raise UsageError("et0 must cover the same days as rain")
        if np.isnan(loss[start:]).any():
            raise MissingValueError(f"detect_cessation_presao: missing ET0 in {year}")
    cap = params.presao_capacity_mm
    if params.presao_init == "onset":
        if onset is None:
            return CessationResult(None, False)
        begin = (onset - dt.date(year, 1, 1)).days
        if np.isnan(x[begin:]).any() or np.isnan(loss[begin:]).any():
            raise MissingValueError(f"detect_cessation_presao: missing data in {year} after onset")
        stock = water_balance(x[begin:], loss[begin:], cap, 0.0)
        first = max(start, begin)
        offset = begin
    else:
        first = start
        if onset is not None:
            first = max(start, (onset - dt.date(year, 1, 1)).days)
        stock = water_balance(x[first:], loss[first:], cap, cap)
        offset = first
    empty = np.flatnonzero(stock[first - offset:] <= 0.0)
    if empty.size == 0:
        return CessationResult(None, True)
    return CessationResult(_date_at(year, first + empty[0]), False)


def count_rainy_days(rain, wet_day_mm: float) -> int:
    rain = np.asarray(rain, dtype=float)
    return int(np.sum(rain >= wet_day_mm))


def season_markers(rain: Sequence[float], year: int, params: SeasonParams = SeasonParams(),
                   et0: Optional[Sequence[float]] = None) -> SeasonMarkers:
    """All markers for one calendar year of rainfall.

    Cessation searches never start before the onset, so defined lengths are
    never negative.
    """
    x = np.asarray(rain, dtype=float)
    onset = detect_onset_sivakumar(x, year, params)
    siva = detect_cessation_sivakumar(x, year, params, not_before=onset.onset)
    presao = detect_cessation_presao(x, year, params, et0=et0, onset=onset.onset)

    def _length(end):
        if onset.onset is None or end is None:
            return None
        return (end - onset.onset).days

    in_season = None
    if onset.onset is not None and siva.cessation is not None:
        a = (onset.onset - dt.date(year, 1, 1)).days
        b = (siva.cessation - dt.date(year, 1, 1)).days
        in_season = count_rainy_days(x[a:b + 1], params.wet_day_mm)
    return SeasonMarkers(
        year=year,
        onset=onset.onset,
        cessation_siva=siva.cessation,
        cessation_presao=presao.cessation,
        length_siva=_length(siva.cessation),
        length_presao=_length(presao.cessation),
        rainy_days_in_season=in_season,
        rainy_days_in_year=count_rainy_days(x[~np.isnan(x)], params.wet_day_mm),
        false_start_dates=onset.false_starts,
        siva_flagged=siva.flagged,
        presao_flagged=presao.flagged,
    )


def season_summary(series: StationSeries, params: SeasonParams = SeasonParams(),
                   et0: Optional[Sequence[float]] = None) -> list:
    """:class:`SeasonMarkers` for every complete calendar year of ``series``.

    ``et0``, when given, is a daily array aligned with ``series.records``
    and replaces the constant PRESAO loss.
    """
    years = series.full_years()
    if not years:
        raise InsufficientDataError("season_summary needs at least one complete calendar year")
    rain = series.column("rain")
    et0 = None if et0 is None else np.asarray(et0, dtype=float)
    if et0 is not None and et0.shape != rain.shape:
        raise UsageError("et0 must be aligned with the series records")
    out = []
    for year in years:
        mask = series.years == year
        out.append(season_markers(rain[mask], year, params, None if et0 is None else et0[mask]))
    return out


def dry_spells(rain: Sequence[float], year: int, params: SeasonParams = SeasonParams(),
               scope: str = "whole-year", onset: Optional[dt.date] = None,
               cessation: Optional[dt.date] = None) -> DrySpellCatalog:
    """Maximal runs of days with ``rain < wet_day_mm``.

    ``scope="within-season"`` restricts the slice to ``onset..cessation``
    (inclusive); runs are cut at the slice boundaries.
    """
    x = np.asarray(rain, dtype=float)
    first = 0
    if scope == "within-season":
        if onset is None or cessation is None:
            raise ScopeError(f"{year}: within-season dry spells need a defined onset and cessation")
        first = (onset - dt.date(year, 1, 1)).days
        x = x[first:(cessation - dt.date(year, 1, 1)).days + 1]
    elif scope != "whole-year":
        raise UsageError(f"scope must be 'whole-year' or 'within-season', got {scope!r}")
    if np.isnan(x).any():
        raise MissingValueError(f"dry_spells: missing rainfall in {year}; impute first")
    dry = np.concatenate(([False], x < params.wet_day_mm, [False])).astype(np.int8)
    edges = np.diff(dry)
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    spells = tuple(DrySpell(_date_at(year, first + s), int(e - s)) for s, e in zip(starts, stops))
    return DrySpellCatalog(spells, scope)


def spell_length_share(catalogs: Sequence[DrySpellCatalog], max_length: int = 7) -> float:
    """Fraction of all spells with length <= ``max_length``."""
    lengths = np.concatenate([c.lengths for c in catalogs]) if catalogs else np.array([])
    if lengths.size == 0:
        return float("nan")
    return float(np.mean(lengths <= max_length))


@dataclass(frozen=True)
class OnsetRisk:
    """Empirical quantiles of onset day-of-year and the exceedance curve."""

    doys: tuple
    quantiles: dict = field(default_factory=dict)

    def exceedance(self, doy: float) -> float:
        """Fraction of years whose onset falls after ``doy``."""
        values = np.asarray(self.doys, dtype=float)
        return float(np.mean(values > doy))

    def non_exceedance(self, doy: float) -> float:
        return 1.0 - self.exceedance(doy)


RISK_LEVELS = (0.10, 0.25, 0.50, 0.75, 0.90)


def onset_risk_quantiles(onset_doys: Sequence[float], levels: Sequence[float] = RISK_LEVELS) -> OnsetRisk:
    """Linear-interpolation quantiles of onset days-of-year.

    Undefined onsets (``None``/NaN) are dropped; at least 5 must remain.
    """
    values = np.array([np.nan if v is None else v for v in onset_doys], dtype=float)
    values = np.sort(values[~np.isnan(values)])
    if values.size < 5:
        raise InsufficientDataError(f"onset_risk_quantiles needs >= 5 defined onsets, got {values.size}")
    qs = np.quantile(values, list(levels))
    return OnsetRisk(tuple(float(v) for v in values),
                     {float(level): float(q) for level, q in zip(levels, qs)})


def doy_to_date(doy: float, year: int = 2001) -> dt.date:
    """Calendar date for a (possibly fractional, rounded down) day-of-year."""
    return dt.date(year, 1, 1) + dt.timedelta(days=int(np.floor(doy)) - 1)


def day_of_year(day: Optional[dt.date]) -> Optional[int]:
    return None if day is None else day.timetuple().tm_yday
