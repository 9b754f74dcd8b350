"""The full pipeline through the command line.

Writes a station file to a temporary folder and runs ``agroseason report``
on it, then lists what came out. The same call from a shell is::

    agroseason report --input daily.csv --station station.json --out results/
"""
import io
import json
import tempfile
from pathlib import Path

from agroseason import cli
from agroseason.ingest import write_daily_csv
from agroseason.synthetic import synthetic_station

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    series = synthetic_station(1990, 2019, seed=11, missing_fraction=0.01)
    with open(tmp / "daily.csv", "w", newline="") as fh:
        write_daily_csv(series, fh)
    meta = series.meta
    (tmp / "station.json").write_text(json.dumps(
        {"station_id": meta.station_id, "latitude": meta.latitude,
         "longitude": meta.longitude, "altitude": meta.altitude}))

    code = cli.run(["report", "--input", str(tmp / "daily.csv"), "--station", str(tmp / "station.json"),
                    "--out", str(tmp / "results"), "--timestamp", "2024-01-01T00:00:00Z"], stdout=io.StringIO())
    print("exit status", code)
    report = json.loads((tmp / "results" / "report.json").read_text())
    print("sections:", ", ".join(k for k in report if k not in ("schema_version", "generated_at")))
    trend = report["annual_trends"]["rain_sum"]["trend"]["mann_kendall"]
    print(f"annual rain trend z={trend['z']:+.2f} p={trend['p_two_sided']:.2f}")
    print("onset quantiles (day of year):", report["onset_risk"]["quantiles"])
    print("\nCSV files:")
    for path in sorted((tmp / "results").glob("*.csv")):
        print(f"  {path.name:28s} {path.read_text().splitlines()[0]}")
