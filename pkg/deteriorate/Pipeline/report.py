"""
Cohort-level data-quality reports and their export.
"""

import json
import logging
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from deteriorate.errors import DomainError
from deteriorate.Ingest.records import MINUTES_PER_DAY, Modality
from deteriorate.Pipeline.alerts import AlertLog, compliance_check
from deteriorate.Pipeline.metrics import (
    compute_sleep_yield,
    compute_yield,
    gap_analysis,
    latency_cdf,
    median,
    nearest_rank_percentile,
)
from deteriorate.settings import PipelineConfig

logger = logging.getLogger(__name__)

YIELD_COLUMNS = ("heart_rate", "steps", "sleep")


@dataclass
class YieldReport:
    """
    Per-patient yields.

    Attributes:
        per_patient (pd.DataFrame): index patient_id, one column per
            YIELD_COLUMNS entry
    """

    per_patient: pd.DataFrame

    @property
    def mean(self):
        return self.per_patient.mean().to_dict()

    @property
    def std(self):
        return self.per_patient.std(ddof=1).to_dict()

    def fraction_above(self, level, column="steps"):
        """Fraction of patients whose yield is strictly above ``level``."""
        return float((self.per_patient[column] > level).mean())

    def to_dict(self, level=0.8):
        return {
            "per_patient": {pid: row.to_dict() for pid, row in self.per_patient.iterrows()},
            "mean": self.mean,
            "std": self.std,
            "fraction_above": {column: self.fraction_above(level, column)
                               for column in YIELD_COLUMNS},
            "fraction_above_level": level,
        }


def yield_report(cohort, config=None):
    config = config if config is not None else PipelineConfig()
    rows = {}
    for record in cohort:
        rows[record.patient_id] = {
            "heart_rate": compute_yield(record.heart_rate, record.span, config.sampling_period),
            "steps": compute_yield(record.steps, record.span, config.sampling_period),
            "sleep": compute_sleep_yield(record),
        }
    frame = pd.DataFrame.from_dict(rows, orient="index", columns=list(YIELD_COLUMNS))
    frame.index.name = "patient_id"
    return YieldReport(frame)


def yield_difference(report):
    """Per-patient step yield minus heart-rate yield."""
    return report.per_patient["steps"] - report.per_patient["heart_rate"]


def sleep_yield_groups(report):
    """Split patients at the median sleep yield into high (>=) and low (<)."""
    sleep = report.per_patient["sleep"]
    cut = sleep.median()
    return {"high": sorted(sleep.index[sleep >= cut]), "low": sorted(sleep.index[sleep < cut])}


@dataclass
class ReliabilityReport:
    """Pooled time-to-failure and time-to-recovery durations of one modality."""

    modality: Modality
    time_to_failure: list
    time_to_recovery: list
    patient_days: float
    percentile: float = 95.0

    @property
    def failures_per_patient_day(self):
        return len(self.time_to_recovery) / self.patient_days if self.patient_days else float("nan")

    def summary(self):
        return {
            "modality": self.modality.value,
            "ttf_median": median(self.time_to_failure),
            "ttr_median": median(self.time_to_recovery),
            f"ttf_p{self.percentile:g}": nearest_rank_percentile(self.time_to_failure,
                                                                 self.percentile),
            f"ttr_p{self.percentile:g}": nearest_rank_percentile(self.time_to_recovery,
                                                                 self.percentile),
            "n_failures": len(self.time_to_recovery),
            "failures_per_patient_day": self.failures_per_patient_day,
        }

    def to_frame(self):
        return pd.concat([
            pd.DataFrame({"kind": "ttf", "minutes": self.time_to_failure}),
            pd.DataFrame({"kind": "ttr", "minutes": self.time_to_recovery}),
        ], ignore_index=True)


def reliability_report(cohort, modality, config=None):
    config = config if config is not None else PipelineConfig()
    modality = Modality(modality)
    ttf, ttr, days = [], [], 0.0
    for record in cohort:
        _, rows = gap_analysis(record.series(modality), record.span)
        ttf.extend(rows.time_to_failure)
        ttr.extend(rows.time_to_recovery)
        days += rows.span_days
    return ReliabilityReport(modality, ttf, ttr, days, config.percentile)


def latency_summary(cohort, config=None):
    """
    Latency statistics pooled over every sync event of the cohort.

    Reports how many events arrived later than the on-device storage horizon,
    after which unsynced minutes are overwritten.
    """
    config = config if config is not None else PipelineConfig()
    events = [event for record in cohort for event in record.sync_events]
    if not events:
        raise DomainError("cohort has no sync events")
    cdf = latency_cdf(events)
    horizon = config.storage_horizon_days * MINUTES_PER_DAY
    return cdf, {
        "n_events": int(cdf.latencies.size),
        "median_minutes": cdf.median(),
        "p99_minutes": cdf.percentile(99),
        f"p{config.percentile:g}_minutes": cdf.percentile(config.percentile),
        "fraction_under_60_minutes": cdf.at(60.0 - 1e-9),
        "over_storage_horizon": int(np.count_nonzero(cdf.latencies > horizon)),
    }


def _write_json(data, path):
    with open(path, "w", encoding="utf-8") as file:
        json.dump(data, file, indent=2, sort_keys=True, allow_nan=True)
        file.write("\n")


def write_pipeline_report(cohort, out_dir, config=None):
    """
    Write yield, reliability, latency and alert reports for a cohort.

    Returns:
        list[str]: paths written
    """
    config = config if config is not None else PipelineConfig()
    os.makedirs(out_dir, exist_ok=True)
    written = []

    report = yield_report(cohort, config)
    path = os.path.join(out_dir, "yield.csv")
    report.per_patient.assign(step_minus_hr=yield_difference(report)).to_csv(
        path, float_format="%.6f")
    written.append(path)
    summary = report.to_dict(config.yield_level)
    summary["sleep_groups"] = sleep_yield_groups(report)
    path = os.path.join(out_dir, "yield.json")
    _write_json(summary, path)
    written.append(path)

    reliability = {}
    for modality in Modality:
        rel = reliability_report(cohort, modality, config)
        reliability[modality.value] = rel.summary()
        path = os.path.join(out_dir, f"reliability_{modality.value}.csv")
        rel.to_frame().to_csv(path, index=False)
        written.append(path)
    path = os.path.join(out_dir, "reliability.json")
    _write_json(reliability, path)
    written.append(path)

    if any(record.sync_events for record in cohort):
        cdf, latency = latency_summary(cohort, config)
        path = os.path.join(out_dir, "latency_cdf.csv")
        cdf.to_frame().to_csv(path, index=False, float_format="%.6f")
        written.append(path)
        path = os.path.join(out_dir, "latency.json")
        _write_json(latency, path)
        written.append(path)
    else:
        logger.warning("no sync events in cohort; latency report skipped")

    path = os.path.join(out_dir, "alerts.jsonl")
    if os.path.exists(path):
        os.remove(path)
    log = AlertLog(path)
    n_alerts = 0
    for record in cohort:
        for day in record.days():
            n_alerts += len(compliance_check(record, day, config, log))
    if not os.path.exists(path):
        open(path, "w", encoding="utf-8").close()
    written.append(path)
    logger.info("pipeline report: %d patients, %d alerts", len(cohort), n_alerts)
    return sorted(written)
