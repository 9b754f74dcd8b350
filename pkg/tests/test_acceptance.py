"""Acceptance criteria, one test per criterion.

Each test carries an ``acceptance`` marker; the conftest prints one
PASS/FAIL line per criterion at the end of the run.
"""
import datetime as dt
import io
import math
import time
import warnings
from collections import Counter, defaultdict

import numpy as np
import pytest
import scipy.stats

from agroseason import cli, evapo, season, stats
from agroseason.ingest import DailyRecord, day_of_year_key, impute_missing, write_daily_csv
from agroseason.season import SeasonParams
from agroseason.synthetic import synthetic_station

from hand_traces import (ONSET_TRACES, PRESAO_REFILL_LEDGER, PRESAO_TRACES, SIVA_TRACES, YEAR,
                         idx, random_year, year_rain)


def _sgn(a, b):
    return (a > b) - (a < b)


def mk_oracle(x):
    """Double-loop S, tie-corrected variance, continuity-corrected z, erfc p."""
    n = len(x)
    s = 0
    for i in range(n - 1):
        xi = x[i]
        for j in range(i + 1, n):
            s += _sgn(x[j], xi)
    ties = sum(t * (t - 1) * (2 * t + 5) for t in Counter(x).values())
    var = (n * (n - 1) * (2 * n + 5) - ties) / 18.0
    z = 0.0 if s == 0 else (s - math.copysign(1, s)) / math.sqrt(var)
    return s, var, z, math.erfc(abs(z) / math.sqrt(2.0))


@pytest.mark.acceptance(1, "Mann-Kendall equals the brute-force double loop")
def test_ac1_mann_kendall_brute_force(record_property):
    rng = np.random.default_rng(2024)
    series = []
    for k in range(1000):
        n = int(rng.integers(4, 201))
        if k % 2:
            series.append(rng.integers(0, max(2, n // 4), n).astype(float).tolist())  # heavy ties
        else:
            series.append(rng.normal(size=n).tolist())
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        results = [stats.mann_kendall(x) for x in series]
    elapsed = time.perf_counter() - t0
    worst = 0.0
    for x, res in zip(series, results):
        s, var, z, p = mk_oracle(x)
        assert res.s == s
        assert res.var_s == pytest.approx(var, abs=1e-9)
        worst = max(worst, abs(res.z - z), abs(res.p_two_sided - p))
    assert worst < 1e-9
    assert elapsed < 10.0
    record_property("detail", f"1000 series, max |dz|,|dp| = {worst:.1e}, runtime {elapsed:.2f} s")


@pytest.mark.acceptance(2, "Mann-Kendall known values")
def test_ac2_known_values(record_property):
    res = stats.mann_kendall(list(range(1, 11)))
    assert (res.s, res.var_s) == (45, 125.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        flat = stats.mann_kendall([7.0] * 6)
    assert (flat.s, flat.z) == (0, 0.0)
    record_property("detail", f"S=45 V=125 z={res.z:.4f}; constant S=0 z=0")


@pytest.mark.acceptance(3, "Pettitt step fixture and recursion vs double sum")
def test_ac3_pettitt(record_property):
    res = stats.pettitt([0.0] * 4 + [10.0] * 4)
    n, k = 8, 16
    direct_p = 2.0 * math.exp(-6.0 * k ** 2 / (n ** 3 + n ** 2))
    assert res.k_stat == 16 and res.break_index == 4
    assert abs(res.p_approx - direct_p) < 1e-3
    assert abs(res.p_approx - 0.139) < 1e-3

    rng = np.random.default_rng(77)
    for trial in range(500):
        m = int(rng.integers(4, 101))
        x = rng.normal(size=m) if trial % 2 else rng.integers(0, 5, m).astype(float)
        u = stats.pettitt(x).u_series
        direct = [int(np.sign(x[:t, None] - x[None, t:]).sum()) for t in range(1, m)]
        assert list(u) == direct
    record_property("detail", f"K=16 index=4 p={res.p_approx:.4f}; 500 random U series exact")


@pytest.mark.acceptance(4, "Shapiro-Wilk agrees with an independent reference")
def test_ac4_shapiro_wilk(record_property):
    rng = np.random.default_rng(5)
    draws = [lambda n: rng.normal(size=n), lambda n: rng.gamma(2.0, size=n),
             lambda n: rng.uniform(size=n), lambda n: rng.standard_t(4, size=n),
             lambda n: rng.exponential(size=n)]
    dw = dp = 0.0
    for k in range(50):
        n = int(rng.integers(3, 501))
        x = draws[k % len(draws)](n)
        ours = stats.shapiro_wilk(x)
        ref = scipy.stats.shapiro(x)
        dw = max(dw, abs(ours.w - ref.statistic))
        dp = max(dp, abs(ours.p - ref.pvalue))
    assert dw < 1e-3 and dp < 5e-3
    record_property("detail", f"50 samples, max |dW|={dw:.1e}, max |dp|={dp:.1e}")


@pytest.mark.acceptance(5, "Sivakumar hand traces and onset monotonicity")
def test_ac5_sivakumar(record_property):
    p = SeasonParams()
    for build in ONSET_TRACES.values():
        rain, expected, false_starts = build()
        got = season.detect_onset_sivakumar(rain, YEAR, p)
        assert (got.onset, got.false_starts) == (expected, false_starts)
    for build in SIVA_TRACES.values():
        rain, expected, flagged = build()
        got = season.detect_cessation_sivakumar(rain, YEAR, p)
        assert (got.cessation, got.flagged) == (expected, flagged)

    rng = np.random.default_rng(11)
    for _ in range(200):
        rain = random_year(rng)
        lo, hi = sorted(rng.uniform(5.0, 60.0, 2))
        a = season.detect_onset_sivakumar(rain, YEAR, SeasonParams(onset_accum_mm=lo)).onset
        b = season.detect_onset_sivakumar(rain, YEAR, SeasonParams(onset_accum_mm=hi)).onset
        if b is not None:
            assert a is not None and a <= b
    record_property("detail", "3 onset + 3 cessation traces exact; 200 random years monotone")


@pytest.mark.acceptance(6, "PRESAO water balance")
def test_ac6_presao(record_property):
    p = SeasonParams()
    start = idx(YEAR, 9, 1)
    dry = season.water_balance(year_rain()[start:start + 14], 5.0, 70.0, 70.0)
    assert dry.tolist() == [70.0 - 5.0 * k for k in range(1, 15)]
    assert season.detect_cessation_presao(year_rain(), YEAR, p).cessation == dt.date(YEAR, 9, 14)

    rng = np.random.default_rng(6)
    for _ in range(1000):
        rain = random_year(rng)
        state = season.WaterBalanceState(70.0, 70.0)
        for r in rain[start:]:
            state.step(float(r), 5.0)
            assert 0.0 <= state.stock <= 70.0

    rain, expected, _ = PRESAO_TRACES["refill"]()
    stock = season.water_balance(rain[start:start + 19], 5.0, 70.0, 70.0)
    assert stock.tolist() == PRESAO_REFILL_LEDGER
    assert season.detect_cessation_presao(rain, YEAR, p).cessation == expected
    record_property("detail", "dry bucket empty on day 14; 1000 years in [0, 70]; refill ledger exact")


@pytest.mark.acceptance(7, "FAO-56 worked daily example")
def test_ac7_fao56(record_property):
    site = evapo.SiteParams(latitude=50.8, altitude=100.0, wind_height=10.0)
    rec = DailyRecord(dt.date(2001, 7, 6), tmin=12.3, tmax=21.5, rhmin=63.0, rhmax=84.0,
                      wind=10.0 / 3.6, sunshine=9.25)
    value = evapo.fao56_et0(rec, site)
    assert abs(value - 3.9) < 0.05
    record_property("detail", f"ET0={value:.4f} mm/day vs published 3.9")


@pytest.mark.acceptance(8, "Dry-spell counting identity")
def test_ac8_counting_identity(record_property):
    rng = np.random.default_rng(8)
    p = SeasonParams()
    for _ in range(1000):
        rain = random_year(rng)
        cat = season.dry_spells(rain, YEAR, p)
        assert int(cat.lengths.sum()) + int(np.sum(rain >= p.wet_day_mm)) == rain.size
    record_property("detail", "1000 random years")


@pytest.mark.acceptance(9, "Imputation equals the day-of-year mean; idempotent")
def test_ac9_imputation(record_property):
    gappy = synthetic_station(1990, 2019, seed=21, missing_fraction=0.03)
    filled, report = impute_missing(gappy)
    assert report.imputed and not any(v.adjusted for v in report.imputed)

    pools = defaultdict(list)
    for rec in gappy.records:
        for var in gappy.variables:
            value = rec.get(var)
            if value is not None:
                pools[var, day_of_year_key(rec.date)].append(value)
    by_date = {rec.date: rec for rec in filled.records}
    worst = 0.0
    for item in report.imputed:
        pool = pools[item.variable, day_of_year_key(item.date)]
        expected = math.fsum(pool) / len(pool)
        worst = max(worst, abs(by_date[item.date].get(item.variable) - expected))
    assert worst <= 1e-12

    again, second = impute_missing(filled)
    assert again is filled and not second.imputed
    record_property("detail", f"{len(report.imputed)} imputed cells, max error {worst:.1e}; idempotent")


@pytest.mark.acceptance(10, "End-to-end report determinism")
def test_ac10_determinism(tmp_path, record_property):
    series = synthetic_station(1990, 2019, seed=13, missing_fraction=0.01)
    csv_path = tmp_path / "daily.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        write_daily_csv(series, fh)
    meta = tmp_path / "station.json"
    meta.write_text('{"station_id": "S", "latitude": 13.4, "longitude": -6.15, "altitude": 288}')
    blobs = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = cli.run(["report", "--input", str(csv_path), "--station", str(meta), "--out", str(out),
                        "--timestamp", "2024-01-01T00:00:00Z"], io.StringIO(), io.StringIO(), environ={})
        assert code == 0
        blobs.append((out / "report.json").read_bytes())
    assert blobs[0] == blobs[1]
    record_property("detail", f"report.json {len(blobs[0])} bytes, identical")
