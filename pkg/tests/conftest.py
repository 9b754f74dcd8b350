import json
import time

import pytest

from agroseason.ingest import write_daily_csv
from agroseason.synthetic import synthetic_station


@pytest.fixture(scope="session")
def station():
    return synthetic_station(1990, 2019, seed=7)


@pytest.fixture(scope="session")
def gappy_station():
    return synthetic_station(1990, 2019, seed=11, missing_fraction=0.02)


@pytest.fixture(scope="session")
def station_files(tmp_path_factory, gappy_station):
    root = tmp_path_factory.mktemp("station")
    csv_path = root / "daily.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        write_daily_csv(gappy_station, fh)
    meta_path = root / "station.json"
    meta = gappy_station.meta
    meta_path.write_text(json.dumps({"station_id": meta.station_id, "latitude": meta.latitude,
                                     "longitude": meta.longitude, "altitude": meta.altitude}))
    return csv_path, meta_path


# acceptance reporting -------------------------------------------------------

SUITE_BUDGET_S = 60.0
_session_start = time.perf_counter()
_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


def pytest_runtest_logreport(report):
    marker = dict(report.user_properties).get("acceptance")
    if marker is None:
        return
    number, title = marker
    entry = _acceptance.setdefault(number, {"title": title, "ok": True, "details": []})
    if report.failed:
        entry["ok"] = False
    if report.when == "call":
        entry["details"].extend(v for k, v in report.user_properties if k == "detail")


@pytest.fixture(autouse=True)
def _tag_acceptance(request):
    marker = request.node.get_closest_marker("acceptance")
    if marker is not None:
        request.node.user_properties.append(("acceptance", tuple(marker.args)))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    elapsed = time.perf_counter() - _session_start
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        entry = _acceptance[number]
        status = "PASS" if entry["ok"] else "FAIL"
        detail = "; ".join(entry["details"])
        terminalreporter.write_line(f"AC{number:<2} {status}  {entry['title']}" + (f"  [{detail}]" if detail else ""))
    status = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
    terminalreporter.write_line(f"suite runtime {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s): {status}")


def pytest_sessionfinish(session, exitstatus):
    if _acceptance and time.perf_counter() - _session_start >= SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1
