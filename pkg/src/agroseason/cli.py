"""Command-line front end.

``agroseason report`` runs the whole pipeline and writes ``report.json``
plus CSV plot-data files; the other commands print one analysis as JSON on
standard output. Exit status: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import json
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import evapo, ingest, season, stats
from .errors import AgroseasonError, DataError, UsageError

SCHEMA_VERSION = "1.0"
CONFIG_ENV = "AGROSEASON_CONFIG"
COMMANDS = ("report", "trend", "breakpoint", "season", "dryspells", "correlate", "normality", "regime")
SEASON_PARAMETERS = ("onset_doy", "cessation_siva_doy", "cessation_presao_doy",
                     "length_siva", "length_presao", "rainy_days_in_season", "rainy_days_in_year")
RAIN_BIN_EDGES = (1.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 75.0, 100.0, 150.0, 250.0, 500.0)


@dataclass
class RunConfig:
    input: Optional[str] = None
    station: Optional[str] = None
    out: Optional[str] = None
    alpha: float = 0.05
    variables: list = field(default_factory=list)
    criterion: str = "both"
    agg: Optional[str] = None
    period: str = "annual"
    scope: str = "whole-year"
    impute: bool = True
    timestamp: Optional[str] = None
    season: season.SeasonParams = field(default_factory=season.SeasonParams)

    def validate(self):
        if not 0.0 < self.alpha < 1.0:
            raise UsageError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.input:
            raise UsageError("an input CSV is required (--input or config 'input')")
        if self.criterion not in ("sivakumar", "presao", "both"):
            raise UsageError(f"unknown criterion {self.criterion!r}")


# ----------------------------------------------------------------------------
# Serialization helpers
# ----------------------------------------------------------------------------

def jsonable(obj):
    """Plain JSON types; NaN becomes null, dates ISO-8601."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return None if math.isnan(value) or math.isinf(value) else value
    if isinstance(obj, (dt.date, dt.datetime)):
        return obj.isoformat()
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if hasattr(obj, "_asdict"):
        return {k: jsonable(v) for k, v in obj._asdict().items()}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(payload) -> str:
    return json.dumps(jsonable(payload), indent=2, allow_nan=False) + "\n"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else repr(float(value))
    if isinstance(value, dt.date):
        return value.isoformat()
    return str(value)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def load_schema() -> dict:
    return json.loads(resources.files("agroseason").joinpath("report.schema.json").read_text("utf-8"))


# ----------------------------------------------------------------------------
# Analysis building blocks (each returns plain data for the JSON payload)
# ----------------------------------------------------------------------------

@dataclass
class Dataset:
    series: ingest.StationSeries
    imputation: ingest.ImputationReport
    et0: Optional[evapo.Et0Series]


def load_dataset(cfg: RunConfig) -> Dataset:
    meta = ingest.load_station_json(cfg.station) if cfg.station else None
    series = ingest.read_daily_csv(cfg.input, station=meta)
    if not series.records:
        raise DataError(f"{cfg.input}: no data rows")
    report = ingest.ImputationReport()
    if cfg.impute:
        series, report = ingest.impute_missing(series)
    et0 = None
    site = None
    if series.latitude is not None:
        site = evapo.SiteParams.from_series(series)
    if "et0" in series.variables or site is not None:
        et0 = evapo.et0_series(series, site)
        if et0.coverage()["missing"] == len(series.records):
            et0 = None
    return Dataset(series, report, et0)


def annual_series_specs(series: ingest.StationSeries, et0: Optional[evapo.Et0Series]) -> list:
    specs = []
    for var in series.variables:
        if var == "et0":
            continue
        specs.append((f"{var}_{ingest.default_statistic(var)}", var, ingest.default_statistic(var)))
        if var == "rain":
            specs.append(("rain_max", "rain", "max"))
    if et0 is not None:
        specs.append(("et0_sum", "et0", "sum"))
    return specs


def _series_with_et0(ds: Dataset) -> ingest.StationSeries:
    if ds.et0 is None:
        return ds.series
    return ingest.with_column(ds.series, "et0", ds.et0.values)


def aggregated(ds: Dataset, variable: str, statistic: str, period: str = "annual") -> ingest.AggregatedSeries:
    series = _series_with_et0(ds) if variable == "et0" else ds.series
    return ingest.aggregate(series, variable, period, statistic)


def trend_block(agg: ingest.AggregatedSeries, alpha: float) -> dict:
    keys = [p.key for p in agg.points if p.value is not None]
    values = [p.value for p in agg.points if p.value is not None]
    out = {"variable": agg.variable, "statistic": agg.statistic, "period": agg.period_kind,
           "keys": keys, "values": values}
    if len(values) < 4:
        out["error"] = f"only {len(values)} complete periods"
        return out
    mk = stats.mann_kendall(values)
    sen = stats.sen_slope(values)
    ols = stats.ols_slope(values)
    out["mann_kendall"] = dict(jsonable(mk), significant=mk.significant(alpha))
    out["sen_slope"] = jsonable(sen)
    out["ols_slope"] = jsonable(ols)
    if agg.period_kind == "annual":
        out["per_decade"] = {"sen": sen.slope * 10.0, "ols": ols.slope * 10.0}
    return out


def breakpoint_block(agg: ingest.AggregatedSeries, alpha: float) -> dict:
    keys = [p.key for p in agg.points if p.value is not None]
    values = [p.value for p in agg.points if p.value is not None]
    out = {"variable": agg.variable, "statistic": agg.statistic, "period": agg.period_kind}
    if len(values) < 4:
        out["error"] = f"only {len(values)} complete periods"
        return out
    res = stats.pettitt(values, alpha=alpha, keys=keys)
    out.update(jsonable(res))
    out["significant"] = res.significant
    return out


def season_param_values(markers: list) -> dict:
    cols = {name: [] for name in SEASON_PARAMETERS}
    for m in markers:
        cols["onset_doy"].append(season.day_of_year(m.onset))
        cols["cessation_siva_doy"].append(season.day_of_year(m.cessation_siva))
        cols["cessation_presao_doy"].append(season.day_of_year(m.cessation_presao))
        cols["length_siva"].append(m.length_siva)
        cols["length_presao"].append(m.length_presao)
        cols["rainy_days_in_season"].append(m.rainy_days_in_season)
        cols["rainy_days_in_year"].append(m.rainy_days_in_year)
    return {k: np.array([np.nan if v is None else v for v in vals], dtype=float) for k, vals in cols.items()}


def season_table(ds: Dataset, markers: list) -> dict:
    """Season parameters per year plus that year's rainfall total."""
    table = season_param_values(markers)
    totals = ingest.aggregate(ds.series, "rain", "annual", "sum")
    by_year = dict(zip(totals.keys, totals.values))
    table["rain_sum"] = np.array([by_year.get(f"{m.year:04d}", np.nan) for m in markers])
    return table


def markers_block(markers: list, criterion: str) -> list:
    rows = []
    for m in markers:
        row = {
            "year": m.year,
            "onset": m.onset,
            "onset_doy": season.day_of_year(m.onset),
            "false_start_dates": list(m.false_start_dates),
            "rainy_days_in_season": m.rainy_days_in_season,
            "rainy_days_in_year": m.rainy_days_in_year,
        }
        if criterion in ("sivakumar", "both"):
            row.update(cessation_siva=m.cessation_siva, cessation_siva_doy=season.day_of_year(m.cessation_siva),
                       length_siva=m.length_siva, siva_flagged=m.siva_flagged)
        if criterion in ("presao", "both"):
            row.update(cessation_presao=m.cessation_presao,
                       cessation_presao_doy=season.day_of_year(m.cessation_presao),
                       length_presao=m.length_presao, presao_flagged=m.presao_flagged)
        rows.append(row)
    return rows


def risk_block(doys) -> dict:
    try:
        risk = season.onset_risk_quantiles(list(doys))
    except AgroseasonError as exc:
        return {"error": str(exc)}
    return {
        "n": len(risk.doys),
        "quantiles": {f"{level:g}": {"doy": q, "date": season.doy_to_date(q).strftime("%m-%d")}
                      for level, q in risk.quantiles.items()},
        "exceedance": [{"doy": d, "fraction_later": risk.exceedance(d)} for d in sorted(set(risk.doys))],
    }


def normality_block(values) -> dict:
    x = np.asarray(values, dtype=float)
    x = x[~np.isnan(x)]
    try:
        res = stats.shapiro_wilk(x)
    except AgroseasonError as exc:
        return {"error": str(exc), "n": int(x.size)}
    return dict(jsonable(res))


def matrix_block(cm: stats.CorrelationMatrix) -> dict:
    return {"labels": list(cm.labels), "r": jsonable(cm.r), "p": jsonable(cm.p),
            "n_pairs": jsonable(cm.n_pairs)}


def compute_markers(ds: Dataset, params: season.SeasonParams) -> list:
    et0 = None
    if ds.et0 is not None and params.presao_loss_from_et0:
        et0 = ds.et0.values
    return season.season_summary(ds.series, params, et0=et0)


def dry_spell_catalogs(ds: Dataset, markers: list, params: season.SeasonParams, scope: str) -> list:
    out = []
    rain = ds.series.column("rain")
    for m in markers:
        year_rain = rain[ds.series.years == m.year]
        if scope == "within-season":
            if m.onset is None or m.cessation_siva is None:
                continue
            cat = season.dry_spells(year_rain, m.year, params, scope, m.onset, m.cessation_siva)
        else:
            cat = season.dry_spells(year_rain, m.year, params, scope)
        out.append((m.year, cat))
    return out


def dry_spell_summary(catalogs: list, max_dry_run: int = 7) -> dict:
    cats = [c for _, c in catalogs]
    lengths = np.concatenate([c.lengths for c in cats]) if cats else np.array([], dtype=int)
    freq = {}
    for length in lengths.tolist():
        freq[str(length)] = freq.get(str(length), 0) + 1
    return {
        "years": len(cats),
        "count": int(lengths.size),
        "share_le_max_dry_run": season.spell_length_share(cats, max_dry_run),
        "max_length": int(lengths.max()) if lengths.size else None,
        "length_frequencies": dict(sorted(freq.items(), key=lambda kv: int(kv[0]))),
    }


def climate_correlation(ds: Dataset) -> stats.CorrelationMatrix:
    series = _series_with_et0(ds)
    names = [v for v in series.variables]
    return stats.pearson_matrix({v: series.column(v) for v in names}, pairwise_complete=True)


def occurrence_edges(variable: str, values: np.ndarray) -> tuple:
    if variable == "rain":
        return RAIN_BIN_EDGES
    values = values[~np.isnan(values)]
    if variable == "wind":
        top = math.ceil(float(values.max()) * 2.0) / 2.0 if values.size else 1.0
        return tuple(np.arange(0.0, max(top, 0.5) + 0.25, 0.5))
    lo = math.floor(float(values.min())) if values.size else 0.0
    hi = math.ceil(float(values.max())) if values.size else 1.0
    if hi <= lo:
        hi = lo + 1.0
    return tuple(np.linspace(lo, hi, 11))


# ----------------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------------

def _selected_vars(cfg: RunConfig, series: ingest.StationSeries, default) -> list:
    chosen = cfg.variables or list(default)
    for v in chosen:
        if v not in ingest.VARIABLES:
            raise UsageError(f"unknown variable {v!r}")
    return chosen


def cmd_trend(cfg: RunConfig) -> dict:
    ds = load_dataset(cfg)
    out = []
    for var in _selected_vars(cfg, ds.series, ["rain"]):
        stat = cfg.agg or ingest.default_statistic(var)
        out.append(trend_block(aggregated(ds, var, stat, cfg.period), cfg.alpha))
    return {"command": "trend", "alpha": cfg.alpha, "results": out}


def cmd_breakpoint(cfg: RunConfig) -> dict:
    ds = load_dataset(cfg)
    out = []
    for var in _selected_vars(cfg, ds.series, ["rain"]):
        stat = cfg.agg or ingest.default_statistic(var)
        out.append(breakpoint_block(aggregated(ds, var, stat, cfg.period), cfg.alpha))
    return {"command": "breakpoint", "alpha": cfg.alpha, "results": out}


def cmd_season(cfg: RunConfig) -> dict:
    ds = load_dataset(cfg)
    markers = compute_markers(ds, cfg.season)
    params = season_param_values(markers)
    return {"command": "season", "criterion": cfg.criterion,
            "markers": markers_block(markers, cfg.criterion),
            "onset_risk": risk_block(params["onset_doy"])}


def cmd_dryspells(cfg: RunConfig) -> dict:
    ds = load_dataset(cfg)
    markers = compute_markers(ds, cfg.season)
    cats = dry_spell_catalogs(ds, markers, cfg.season, cfg.scope)
    return {"command": "dryspells", "scope": cfg.scope, "summary": dry_spell_summary(cats, cfg.season.max_dry_run),
            "spells": [{"year": y, "start": s.start, "length": s.length} for y, c in cats for s in c.spells]}


def cmd_correlate(cfg: RunConfig) -> dict:
    ds = load_dataset(cfg)
    markers = compute_markers(ds, cfg.season)
    seasonal = season_table(ds, markers)
    return {"command": "correlate", "climate": matrix_block(climate_correlation(ds)),
            "season": matrix_block(stats.pearson_matrix(seasonal))}


def cmd_normality(cfg: RunConfig) -> dict:
    ds = load_dataset(cfg)
    markers = compute_markers(ds, cfg.season)
    params = season_param_values(markers)
    out = {}
    for name in cfg.variables or SEASON_PARAMETERS[:5]:
        if name in params:
            out[name] = normality_block(params[name])
        elif name in ingest.VARIABLES:
            stat = cfg.agg or ingest.default_statistic(name)
            out[f"{name}_{stat}"] = normality_block(aggregated(ds, name, stat).values)
        else:
            raise UsageError(f"unknown normality series {name!r}")
    return {"command": "normality", "alpha": cfg.alpha, "results": out}


def cmd_regime(cfg: RunConfig) -> dict:
    ds = load_dataset(cfg)
    out = {}
    for var in _selected_vars(cfg, ds.series, ds.series.variables):
        stat = cfg.agg or "auto"
        series = _series_with_et0(ds) if var == "et0" else ds.series
        out[var] = [None if m is None else m._asdict() for m in ingest.regime(series, var, stat)]
    return {"command": "regime", "results": out}


def build_report(cfg: RunConfig, ds: Dataset) -> tuple:
    """Return (report payload, {filename: csv text})."""
    series = ds.series
    params = cfg.season
    files = {}
    first, last = series.period

    annual = {}
    trends = {}
    for name, var, stat in annual_series_specs(series, ds.et0):
        agg = aggregated(ds, var, stat)
        annual[name] = agg
        trends[name] = {"trend": trend_block(agg, cfg.alpha), "break": breakpoint_block(agg, cfg.alpha)}

    markers = compute_markers(ds, params)
    seasonal = season_table(ds, markers)
    season_keys = [f"{m.year:04d}" for m in markers]
    season_trends = {}
    for name in SEASON_PARAMETERS[:5]:
        values = seasonal[name]
        agg = ingest.AggregatedSeries(name, "annual", "value", tuple(
            ingest.PeriodValue(k, None if np.isnan(v) else float(v), 0 if np.isnan(v) else 1)
            for k, v in zip(season_keys, values)))
        season_trends[name] = {"trend": trend_block(agg, cfg.alpha), "break": breakpoint_block(agg, cfg.alpha)}

    normality = {name: normality_block(seasonal[name]) for name in SEASON_PARAMETERS[:5]}
    for name, res in normality.items():
        if "w" in res:
            res["normal_at_alpha"] = res["p"] > cfg.alpha

    whole = dry_spell_catalogs(ds, markers, params, "whole-year")
    within = dry_spell_catalogs(ds, markers, params, "within-season")

    report = {
        "schema_version": SCHEMA_VERSION,
        "generated_at": cfg.timestamp or dt.datetime.now(dt.timezone.utc).replace(microsecond=0).isoformat(),
        "station": dataclasses.asdict(series.meta),
        "period": {"first_year": first, "last_year": last, "n_days": len(series.records),
                   "full_years": series.full_years()},
        "config": {"alpha": cfg.alpha, "season_params": dataclasses.asdict(params), "imputed": cfg.impute},
        "variables": list(series.variables),
        "imputation": {"total": len(ds.imputation), "by_variable": ds.imputation.counts(),
                       "adjusted": sum(1 for i in ds.imputation.imputed if i.adjusted)},
        "et0": None if ds.et0 is None else {"label": evapo.ET0_LABEL, "coverage": ds.et0.coverage()},
        "annual_trends": trends,
        "season_trends": season_trends,
        "seasons": markers_block(markers, "both"),
        "onset_risk": risk_block(seasonal["onset_doy"]),
        "cessation_risk": {"sivakumar": risk_block(seasonal["cessation_siva_doy"]),
                           "presao": risk_block(seasonal["cessation_presao_doy"])},
        "correlations": {"climate": matrix_block(climate_correlation(ds)),
                         "season": matrix_block(stats.pearson_matrix(seasonal))},
        "normality": normality,
        "dry_spells": {"whole_year": dry_spell_summary(whole, params.max_dry_run),
                       "within_season": dry_spell_summary(within, params.max_dry_run)},
    }

    reg_series = _series_with_et0(ds)
    for var in reg_series.variables:
        rows = []
        for m in ingest.regime(reg_series, var):
            rows.append([m.month, m.n, m.min, m.q1, m.median, m.q3, m.max, m.mean] if m is not None
                        else [None] * 8)
        files[f"regime_{var}.csv"] = csv_text(("month", "n", "min", "q1", "median", "q3", "max", "mean"), rows)
        values = reg_series.column(var)
        hist = ingest.occurrence_histogram(values, var, occurrence_edges(var, values),
                                           exclude_below=params.wet_day_mm if var == "rain" else None)
        edges = hist.bin_edges
        files[f"occurrence_{var}.csv"] = csv_text(
            ("bin_lower", "bin_upper", "count"),
            [(edges[i], edges[i + 1], c) for i, c in enumerate(hist.counts)])
        report.setdefault("occurrence_overflow", {})[var] = hist.overflow

    anomaly_sources = {name: (agg.keys, agg.values) for name, agg in annual.items()}
    for name in ("onset_doy", "length_siva", "length_presao"):
        anomaly_sources[name] = (season_keys, seasonal[name])
    for name, (keys, values) in anomaly_sources.items():
        values = np.asarray(values, dtype=float)
        ok = ~np.isnan(values)
        if ok.sum() < 2 or np.std(values[ok]) == 0:
            continue
        anomalies = stats.standardized_anomalies(values[ok])
        rows = [(k, v, a) for k, v, a in zip(np.asarray(keys)[ok], values[ok], anomalies)]
        files[f"anomalies_{name}.csv"] = csv_text(("period", "value", "anomaly"), rows)

    files["season_markers.csv"] = csv_text(
        ("year", "onset", "onset_doy", "cessation_siva", "cessation_siva_doy", "cessation_presao",
         "cessation_presao_doy", "length_siva", "length_presao", "rainy_days_in_season",
         "rainy_days_in_year", "n_false_starts", "siva_flagged", "presao_flagged"),
        [(m.year, m.onset, season.day_of_year(m.onset), m.cessation_siva, season.day_of_year(m.cessation_siva),
          m.cessation_presao, season.day_of_year(m.cessation_presao), m.length_siva, m.length_presao,
          m.rainy_days_in_season, m.rainy_days_in_year, len(m.false_start_dates), m.siva_flagged,
          m.presao_flagged) for m in markers])
    files["dry_spells.csv"] = csv_text(
        ("year", "scope", "start", "length"),
        [(y, c.scope, s.start, s.length) for y, c in whole + within for s in c.spells])

    for name in SEASON_PARAMETERS[:5]:
        values = seasonal[name]
        values = values[~np.isnan(values)]
        if values.size < 2 or np.std(values) == 0:
            continue
        files[f"qq_{name}.csv"] = csv_text(("theoretical", "observed"), stats.qq_normal(values))
    return report, files


def cmd_report(cfg: RunConfig) -> dict:
    if not cfg.out:
        raise UsageError("report needs an output directory (--out)")
    ds = load_dataset(cfg)
    report, files = build_report(cfg, ds)
    # everything is computed before the first write
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report))
    for name in sorted(files):
        with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(files[name])
    return {"command": "report", "out": str(out), "files": ["report.json"] + sorted(files)}


HANDLERS = {
    "report": cmd_report,
    "trend": cmd_trend,
    "breakpoint": cmd_breakpoint,
    "season": cmd_season,
    "dryspells": cmd_dryspells,
    "correlate": cmd_correlate,
    "normality": cmd_normality,
    "regime": cmd_regime,
}


# ----------------------------------------------------------------------------
# Argument handling
# ----------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="agroseason", description="Agro-climatic risk analysis of daily station records.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", help="daily CSV file")
    parser.add_argument("--station", help="station metadata JSON sidecar")
    parser.add_argument("--out", help="output directory (report)")
    parser.add_argument("--alpha", type=float, help="significance level, default 0.05")
    parser.add_argument("--var", action="append", dest="variables",
                        help="variable to analyse; repeatable")
    parser.add_argument("--criterion", choices=("sivakumar", "presao", "both"))
    parser.add_argument("--agg", choices=("sum", "mean", "max", "min"), help="aggregation statistic")
    parser.add_argument("--period", choices=("annual", "monthly"))
    parser.add_argument("--scope", choices=("whole-year", "within-season"))
    parser.add_argument("--no-impute", action="store_true", help="skip day-of-year imputation")
    parser.add_argument("--timestamp", help="fixed generated_at value for reproducible reports")
    parser.add_argument("--config", help=f"JSON config file (fallback: ${CONFIG_ENV})")
    return parser


def _season_params(overrides: dict) -> season.SeasonParams:
    known = {f.name for f in dataclasses.fields(season.SeasonParams)}
    unknown = set(overrides) - known
    if unknown:
        raise UsageError(f"unknown season parameter(s): {', '.join(sorted(unknown))}")
    try:
        return season.SeasonParams(**overrides)
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def load_config(args: argparse.Namespace, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    path = args.config or environ.get(CONFIG_ENV)
    data = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise DataError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
    allowed = {"input", "station", "out", "alpha", "variables", "criterion", "agg", "period",
               "scope", "impute", "timestamp", "season"}
    unknown = set(data) - allowed
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    cfg = RunConfig(**{k: v for k, v in data.items() if k != "season"},
                    season=_season_params(data.get("season", {})))
    for name in ("input", "station", "out", "alpha", "variables", "criterion", "agg", "period",
                 "scope", "timestamp"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if args.no_impute:
        cfg.impute = False
    cfg.validate()
    return cfg


def run(argv=None, stdout=None, stderr=None, environ=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args, environ)
        result = HANDLERS[args.command](cfg)
    except UsageError as exc:
        print(f"agroseason: usage error: {exc}", file=stderr)
        return 1
    except AgroseasonError as exc:
        print(f"agroseason: data error: {exc}", file=stderr)
        return 2
    except OSError as exc:
        print(f"agroseason: data error: {exc.filename or ''}: {exc.strerror}", file=stderr)
        return 2
    stdout.write(dumps(result))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
