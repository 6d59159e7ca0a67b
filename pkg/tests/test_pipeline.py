import os
from datetime import date, datetime, timedelta, timezone

import numpy as np
import pandas as pd
import pytest

from deteriorate.errors import DomainError
from deteriorate.Ingest import generate_synthetic_cohort
from deteriorate.Ingest.records import BatteryLevel, SyncEvent, day_start_minute
from deteriorate.Pipeline import (
    AlertLog,
    AlertReason,
    YieldReport,
    compliance_check,
    compute_sleep_yield,
    compute_yield,
    evaluate_alert_rules,
    gap_analysis,
    latency_cdf,
    latency_summary,
    reliability_report,
    sleep_yield_groups,
    write_pipeline_report,
    yield_difference,
    yield_report,
)
from deteriorate.settings import PipelineConfig, SynthConfig

START = date(2017, 1, 2)
BASE = datetime(2017, 1, 2, 12, 0, tzinfo=timezone.utc)


def _event(latency, battery=BatteryLevel.HIGH, capture=BASE):
    return SyncEvent(capture, capture + timedelta(minutes=latency), battery)


def test_yield_counts_collected_minutes(series_factory):
    origin = day_start_minute(START)
    series = series_factory("steps", [0, 1, 2, 5], [1, 1, 1, 1])
    assert compute_yield(series, (origin, origin + 10)) == pytest.approx(0.4)
    assert compute_yield(series, (origin, origin + 4)) == pytest.approx(0.75)


def test_yield_with_coarser_sampling_period(series_factory):
    origin = day_start_minute(START)
    series = series_factory("steps", [0, 1, 6], [1, 1, 1])
    assert compute_yield(series, (origin, origin + 10), sampling_period=5) == pytest.approx(1.0)


def test_yield_rejects_empty_span(series_factory):
    series = series_factory("steps", [0], [1])
    with pytest.raises(DomainError):
        compute_yield(series, (10, 10))


def test_four_minute_gap(series_factory):
    origin = day_start_minute(START)
    offsets = [0, 1, 2, 7, 8, 9]
    series = series_factory("heart_rate", offsets, [70] * len(offsets))
    gaps, rows = gap_analysis(series, (origin, origin + 10))
    assert rows.time_to_failure == [3, 3]
    assert rows.time_to_recovery == [4]
    assert len(gaps) == 1
    assert (gaps[0].gap_start - origin, gaps[0].duration) == (3, 4)


def test_boundary_gaps_count(series_factory):
    origin = day_start_minute(START)
    series = series_factory("heart_rate", [3, 4], [70, 70])
    _, rows = gap_analysis(series, (origin, origin + 8))
    assert rows.time_to_failure == [2]
    assert rows.time_to_recovery == [3, 3]


def test_gap_durations_partition_span(series_factory):
    rng = np.random.default_rng(4)
    origin = day_start_minute(START)
    for _ in range(30):
        length = int(rng.integers(1, 500))
        present = np.flatnonzero(rng.random(length) < rng.random())
        series = series_factory("steps", present, np.ones(present.size))
        _, rows = gap_analysis(series, (origin, origin + length))
        assert sum(rows.time_to_failure) + sum(rows.time_to_recovery) == length


def test_latency_cdf():
    cdf = latency_cdf([_event(minutes) for minutes in (5, 10, 10, 60)])
    assert cdf.x.tolist() == [5.0, 10.0, 60.0]
    assert cdf.cum_fraction.tolist() == pytest.approx([0.25, 0.75, 1.0])
    assert cdf.median() == pytest.approx(10.0)
    assert cdf.percentile(99) == pytest.approx(60.0)
    assert cdf.at(9.0) == pytest.approx(0.25)


def test_latency_cdf_needs_events():
    with pytest.raises(DomainError):
        latency_cdf([])


@pytest.mark.parametrize("count, battery, expected", [
    (5399, BatteryLevel.HIGH, [AlertReason.LOW_HEART_RATE_COUNT]),
    (5400, BatteryLevel.HIGH, []),
    (5400, BatteryLevel.MEDIUM, []),
    (5400, BatteryLevel.LOW, [AlertReason.LOW_BATTERY]),
    (5400, None, []),
    (0, BatteryLevel.EMPTY, [AlertReason.LOW_HEART_RATE_COUNT, AlertReason.LOW_BATTERY]),
])
def test_alert_rule_boundaries(count, battery, expected):
    assert [reason for reason, _ in evaluate_alert_rules(count, battery)] == expected


def test_per_minute_data_always_alerts(series_factory, record_factory):
    minutes = np.arange(1440)
    record = record_factory(heart_rate=series_factory("heart_rate", minutes, np.full(1440, 70)))
    alerts = compliance_check(record, START)
    assert [alert.reason for alert in alerts] == [AlertReason.LOW_HEART_RATE_COUNT]
    assert alerts[0].observed == 1440


def test_compliance_uses_last_arrived_battery(record_factory):
    events = (_event(5, BatteryLevel.HIGH), _event(5, BatteryLevel.LOW, BASE + timedelta(hours=2)))
    record = record_factory(sync_events=events)
    config = PipelineConfig(min_daily_heart_rate=0)
    alerts = compliance_check(record, START, config)
    assert [alert.reason for alert in alerts] == [AlertReason.LOW_BATTERY]
    assert alerts[0].to_dict()["observed"] == "low"


def test_compliance_outside_span(record_factory):
    record = record_factory(n_days=2)
    with pytest.raises(DomainError):
        compliance_check(record, START + timedelta(days=2))


def test_alert_log_appends(tmp_path, record_factory):
    log = AlertLog(str(tmp_path / "alerts.jsonl"))
    assert log.read() == []
    record = record_factory(n_days=2)
    for day in record.days():
        compliance_check(record, day, log=log)
    entries = log.read()
    assert len(entries) == 2
    assert {entry["reason"] for entry in entries} == {"LowHeartRateCount"}
    assert entries[1]["date"] == (START + timedelta(days=1)).isoformat()


def test_sleep_yield_counts_days(record_factory, small_cohort):
    assert compute_sleep_yield(record_factory(n_days=3)) == 0.0
    without_sleep = [r for r in small_cohort if len(r.sleep_status) == 0]
    assert all(compute_sleep_yield(r) == 0.0 for r in without_sleep)


def test_zero_missingness_full_yield():
    config = SynthConfig(n_patients=2, n_deteriorated=0, days_per_patient=3, n_without_sleep=0,
                         missingness={"heart_rate": 0.0, "steps": 0.0, "sleep_status": 0.0})
    report = yield_report(generate_synthetic_cohort(config))
    assert report.per_patient["heart_rate"].tolist() == [1.0, 1.0]
    assert report.per_patient["steps"].tolist() == [1.0, 1.0]


def test_yield_difference_and_sleep_groups():
    frame = pd.DataFrame({"heart_rate": [0.9, 0.5, 0.8], "steps": [1.0, 0.7, 0.8],
                          "sleep": [0.2, 0.9, 0.5]}, index=["p1", "p2", "p3"])
    report = YieldReport(frame)
    assert yield_difference(report).tolist() == pytest.approx([0.1, 0.2, 0.0])
    assert sleep_yield_groups(report) == {"high": ["p2", "p3"], "low": ["p1"]}
    assert report.fraction_above(0.75) == pytest.approx(2 / 3)


def test_reliability_report_pools_patients(small_cohort):
    report = reliability_report(small_cohort, "heart_rate")
    total_minutes = sum(r.span.minutes for r in small_cohort)
    assert sum(report.time_to_failure) + sum(report.time_to_recovery) == total_minutes
    assert report.patient_days == pytest.approx(sum(r.n_days for r in small_cohort))
    assert report.summary()["n_failures"] == len(report.time_to_recovery)


def test_latency_summary_storage_horizon(record_factory):
    record = record_factory(n_days=10, sync_events=(_event(5), _event(8 * 1440)))
    _, summary = latency_summary([record])
    assert summary["n_events"] == 2
    assert summary["over_storage_horizon"] == 1


def test_write_pipeline_report(tmp_path, small_cohort):
    paths = write_pipeline_report(small_cohort, str(tmp_path))
    names = {os.path.basename(p) for p in paths}
    assert {"yield.csv", "yield.json", "reliability.json", "latency.json",
            "latency_cdf.csv", "alerts.jsonl"} <= names
