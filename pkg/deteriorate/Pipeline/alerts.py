"""
Compliance alert rules and the persistent alert log.

A day raises LowHeartRateCount when fewer heart-rate samples than the
configured minimum (5400 by default) were collected, and LowBattery when the
last battery level known at the end of the day is below the configured
minimum (medium by default).
"""

import json
import logging
import threading
from dataclasses import dataclass
from datetime import date
from enum import Enum
from functools import lru_cache

import numpy as np

from deteriorate.errors import DomainError
from deteriorate.Ingest.records import MINUTES_PER_DAY, BatteryLevel, day_start_minute, to_epoch_minutes
from deteriorate.settings import PipelineConfig

logger = logging.getLogger(__name__)


class AlertReason(str, Enum):
    LOW_HEART_RATE_COUNT = "LowHeartRateCount"
    LOW_BATTERY = "LowBattery"


@dataclass(frozen=True)
class ComplianceAlert:
    patient_id: str
    date: date
    reason: AlertReason
    observed: object

    def to_dict(self):
        observed = self.observed.label if isinstance(self.observed, BatteryLevel) else self.observed
        return {"patient_id": self.patient_id, "date": self.date.isoformat(),
                "reason": self.reason.value, "observed": observed}


def evaluate_alert_rules(daily_count, battery, min_count=5400, min_battery=BatteryLevel.MEDIUM):
    """
    Pure alert rule over a day's heart-rate sample count and battery level.

    Args:
        daily_count (int): heart-rate samples collected that day
        battery (BatteryLevel | None): last known level, None if unknown
        min_count (int): alert strictly below this count
        min_battery (BatteryLevel): alert strictly below this level

    Returns:
        list[tuple]: (AlertReason, observed value) pairs
    """
    reasons = []
    if daily_count < min_count:
        reasons.append((AlertReason.LOW_HEART_RATE_COUNT, int(daily_count)))
    if battery is not None and battery < min_battery:
        reasons.append((AlertReason.LOW_BATTERY, BatteryLevel(battery)))
    return reasons


@lru_cache(maxsize=64)
def _arrival_minutes(record):
    return np.array([to_epoch_minutes(e.cloud_arrival_time) for e in record.sync_events],
                    dtype=np.int64)


def last_known_battery(record, day):
    """Battery level of the latest sync that arrived by the end of ``day``."""
    day_end = day_start_minute(day) + MINUTES_PER_DAY
    if not record.sync_events:
        return None
    arrivals = _arrival_minutes(record)
    arrived = np.flatnonzero(arrivals < day_end)
    if arrived.size == 0:
        return None
    # events are ordered by capture time; take the latest arrival, later capture on ties
    latest = arrived[np.flatnonzero(arrivals[arrived] == arrivals[arrived].max())[-1]]
    return record.sync_events[latest].battery_level


def compliance_check(record, day, config=None, log=None):
    """
    Apply the alert rules to one monitored day of a patient.

    Args:
        record (PatientRecord): the patient
        day (date): a date within the monitoring span
        config (PipelineConfig, optional): thresholds
        log (AlertLog, optional): sink the alerts are appended to

    Returns:
        list[ComplianceAlert]
    """
    config = config if config is not None else PipelineConfig()
    if not record.monitoring_start <= day <= record.monitoring_end:
        raise DomainError(f"{day} outside the monitoring span of {record.patient_id}")
    start = day_start_minute(day)
    count = len(record.heart_rate.between(start, start + MINUTES_PER_DAY))
    battery = last_known_battery(record, day)
    alerts = [ComplianceAlert(record.patient_id, day, reason, observed)
              for reason, observed in evaluate_alert_rules(
                  count, battery, config.min_daily_heart_rate,
                  BatteryLevel.parse(config.min_battery))]
    if log is not None and alerts:
        log.append(alerts)
    return alerts


class AlertLog:
    """Append-only JSON-lines alert file; appends are serialized."""

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()

    def append(self, alerts):
        lines = "".join(json.dumps(alert.to_dict(), sort_keys=True) + "\n" for alert in alerts)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as file:
                file.write(lines)
        logger.debug("logged %d alert(s) to %s", len(alerts), self.path)

    def read(self):
        try:
            with open(self.path, "r", encoding="utf-8") as file:
                return [json.loads(line) for line in file if line.strip()]
        except FileNotFoundError:
            return []
