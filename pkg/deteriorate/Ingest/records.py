"""
Canonical data model for cohort data.

Per-minute streams are stored as two parallel numpy arrays: epoch minutes
(UTC) and values. Missing minutes are absent from the arrays, never
zero-filled, so yield and gap metrics can be computed from the series itself.
"""

from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from enum import Enum, IntEnum

import numpy as np
import pandas as pd

from deteriorate.errors import CohortError, DomainError, OrderingError
from deteriorate.Models.lace import LaceInputs

MINUTES_PER_DAY = 1440
EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

HEART_RATE_BOUNDS = (20.0, 250.0)
SLEEP_LEVELS = (0, 1, 2, 3)


class Modality(str, Enum):
    """Per-minute stream kinds; the value is the file-name tag."""

    HEART_RATE = "heart_rate"
    STEP = "steps"
    SLEEP_STATUS = "sleep_status"


class SleepLevel(IntEnum):
    """Sleep-status codes delivered by the device."""

    NO_MEASUREMENT = 0
    ASLEEP = 1
    RESTLESS = 2
    AWAKE = 3


class BatteryLevel(IntEnum):
    """Ordered battery levels reported at sync time."""

    EMPTY = 0
    LOW = 1
    MEDIUM = 2
    HIGH = 3

    @classmethod
    def parse(cls, text):
        try:
            return cls[str(text).strip().upper()]
        except KeyError as error:
            raise DomainError(f"unknown battery level {text!r}") from error

    @property
    def label(self):
        return self.name.lower()


def to_epoch_minutes(instant):
    """Minutes since the UTC epoch of a timezone-aware or naive-UTC datetime."""
    if instant.tzinfo is None:
        instant = instant.replace(tzinfo=timezone.utc)
    return int((instant - EPOCH).total_seconds() // 60)


def from_epoch_minutes(minutes):
    """Inverse of :func:`to_epoch_minutes`."""
    return EPOCH + timedelta(minutes=int(minutes))


def day_start_minute(day):
    """Epoch minute of 00:00 UTC on a calendar date."""
    return (day - EPOCH.date()).days * MINUTES_PER_DAY


def format_timestamp(instant):
    return instant.strftime("%Y-%m-%dT%H:%MZ")


@dataclass(frozen=True)
class TimedSample:
    """One minute-resolution observation."""

    timestamp: datetime
    value: float


@dataclass(frozen=True)
class TimeSpan:
    """Half-open interval [start, end) with minute resolution."""

    start: datetime
    end: datetime

    def __post_init__(self):
        if self.end <= self.start:
            raise DomainError(f"empty span [{self.start}, {self.end})")

    @classmethod
    def from_dates(cls, first_day, last_day):
        """Span covering whole calendar days, last_day inclusive."""
        start = datetime.combine(first_day, datetime.min.time(), tzinfo=timezone.utc)
        end = datetime.combine(last_day + timedelta(days=1), datetime.min.time(),
                               tzinfo=timezone.utc)
        return cls(start, end)

    @property
    def start_minute(self):
        return to_epoch_minutes(self.start)

    @property
    def end_minute(self):
        return to_epoch_minutes(self.end)

    @property
    def minutes(self):
        return self.end_minute - self.start_minute

    @property
    def days(self):
        return self.minutes / MINUTES_PER_DAY


@dataclass(frozen=True, eq=False)
class SampleSeries:
    """
    Time-ordered per-minute stream of one modality.

    Attributes:
        modality (Modality): stream kind
        minutes (np.ndarray): int64 epoch minutes, strictly increasing
        values (np.ndarray): float64 values aligned with ``minutes``
    """

    modality: Modality
    minutes: np.ndarray
    values: np.ndarray
    nominal_period: int = 1

    def __post_init__(self):
        minutes = np.array(self.minutes, dtype=np.int64)
        values = np.array(self.values, dtype=np.float64)
        if minutes.shape != values.shape or minutes.ndim != 1:
            raise DomainError("minutes and values must be 1-D arrays of equal length")
        if minutes.size > 1 and np.any(np.diff(minutes) <= 0):
            raise OrderingError("timestamps must be strictly increasing")
        validate_values(self.modality, values)
        minutes.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "minutes", minutes)
        object.__setattr__(self, "values", values)

    @classmethod
    def empty(cls, modality):
        return cls(modality, np.empty(0, dtype=np.int64), np.empty(0))

    @classmethod
    def from_samples(cls, modality, samples):
        minutes = [to_epoch_minutes(sample.timestamp) for sample in samples]
        values = [sample.value for sample in samples]
        return cls(modality, np.asarray(minutes, dtype=np.int64), np.asarray(values, dtype=float))

    def __len__(self):
        return int(self.minutes.size)

    def __eq__(self, other):
        if not isinstance(other, SampleSeries):
            return NotImplemented
        return (self.modality == other.modality
                and np.array_equal(self.minutes, other.minutes)
                and np.array_equal(self.values, other.values))

    @property
    def samples(self):
        return tuple(TimedSample(from_epoch_minutes(m), float(v))
                     for m, v in zip(self.minutes, self.values))

    @property
    def timestamps(self):
        return pd.to_datetime(self.minutes, unit="m", utc=True)

    def between(self, start_minute, end_minute):
        """Sub-series with start_minute <= minute < end_minute."""
        lo = np.searchsorted(self.minutes, start_minute, side="left")
        hi = np.searchsorted(self.minutes, end_minute, side="left")
        return SampleSeries(self.modality, self.minutes[lo:hi], self.values[lo:hi])

    def to_frame(self):
        return pd.DataFrame({"minute": self.minutes, "value": self.values})


def validate_values(modality, values):
    """Raise DomainError when values break the modality's invariant."""
    if values.size == 0:
        return
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{modality.value}: non-finite value")
    if modality is Modality.HEART_RATE:
        low, high = HEART_RATE_BOUNDS
        if np.any((values <= low) | (values >= high)):
            raise DomainError(f"heart rate outside ({low}, {high}) bpm")
    elif modality is Modality.STEP:
        if np.any(values < 0) or np.any(values != np.floor(values)):
            raise DomainError("step counts must be non-negative integers")
    elif modality is Modality.SLEEP_STATUS:
        if not np.all(np.isin(values, SLEEP_LEVELS)):
            raise DomainError("sleep status must be one of 0, 1, 2, 3")


@dataclass(frozen=True)
class SleepEpisodeSummary:
    """Device summary of one sleep episode, durations in minutes."""

    episode_date: date
    time_in_bed: int
    minutes_to_fall_asleep: int
    minutes_asleep: int
    minutes_awake: int
    minutes_after_wakeup: int
    awake_count: int
    restless_count: int
    restless_duration: int

    FIELDS = ("time_in_bed", "minutes_to_fall_asleep", "minutes_asleep", "minutes_awake",
              "minutes_after_wakeup", "awake_count", "restless_count", "restless_duration")

    def __post_init__(self):
        for name in self.FIELDS:
            if getattr(self, name) < 0:
                raise DomainError(f"sleep summary {self.episode_date}: {name} is negative")
        parts = (self.minutes_to_fall_asleep + self.minutes_asleep
                 + self.minutes_awake + self.minutes_after_wakeup)
        if parts != self.time_in_bed:
            raise DomainError(
                f"sleep summary {self.episode_date}: time_in_bed {self.time_in_bed} "
                f"!= sum of parts {parts}")


@dataclass(frozen=True)
class SyncEvent:
    """One device-to-cloud synchronisation."""

    device_capture_time: datetime
    cloud_arrival_time: datetime
    battery_level: BatteryLevel

    def __post_init__(self):
        if self.cloud_arrival_time < self.device_capture_time:
            raise DomainError("cloud_arrival_time precedes device_capture_time")

    @property
    def latency_minutes(self):
        return (self.cloud_arrival_time - self.device_capture_time).total_seconds() / 60.0


@dataclass(frozen=True)
class OutcomeLabel:
    """Composite outcome (readmission or death) within the follow-up horizon."""

    deterioration_dates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "deterioration_dates",
                           tuple(sorted(self.deterioration_dates)))

    @property
    def deteriorated(self):
        return len(self.deterioration_dates) > 0


@dataclass(frozen=True, eq=False)
class PatientRecord:
    """All data of one monitored patient."""

    patient_id: str
    monitoring_start: date
    monitoring_end: date
    heart_rate: SampleSeries
    steps: SampleSeries
    sleep_status: SampleSeries
    sleep_summaries: tuple = ()
    sync_events: tuple = ()
    outcome: OutcomeLabel = field(default_factory=OutcomeLabel)
    lace_inputs: LaceInputs = None

    def __post_init__(self):
        if self.monitoring_end < self.monitoring_start:
            raise CohortError("monitoring_end precedes monitoring_start", self.patient_id)
        for day in self.outcome.deterioration_dates:
            if not self.monitoring_start <= day <= self.monitoring_end:
                raise CohortError(f"deterioration date {day.isoformat()} outside the monitoring span",
                                  self.patient_id)
        object.__setattr__(self, "sleep_summaries",
                           tuple(sorted(self.sleep_summaries, key=lambda s: s.episode_date)))
        object.__setattr__(self, "sync_events",
                           tuple(sorted(self.sync_events, key=lambda e: e.device_capture_time)))
        span = self.span
        for series in self.all_series():
            if len(series) and (series.minutes[0] < span.start_minute
                                or series.minutes[-1] >= span.end_minute):
                raise CohortError(
                    f"{series.modality.value} samples outside the monitoring span",
                    self.patient_id)

    @property
    def span(self):
        return TimeSpan.from_dates(self.monitoring_start, self.monitoring_end)

    @property
    def n_days(self):
        return (self.monitoring_end - self.monitoring_start).days + 1

    def days(self):
        return [self.monitoring_start + timedelta(days=i) for i in range(self.n_days)]

    def series(self, modality):
        return {
            Modality.HEART_RATE: self.heart_rate,
            Modality.STEP: self.steps,
            Modality.SLEEP_STATUS: self.sleep_status,
        }[Modality(modality)]

    def all_series(self):
        return (self.heart_rate, self.steps, self.sleep_status)

    def __eq__(self, other):
        if not isinstance(other, PatientRecord):
            return NotImplemented
        return (self.patient_id == other.patient_id
                and self.monitoring_start == other.monitoring_start
                and self.monitoring_end == other.monitoring_end
                and self.all_series() == other.all_series()
                and self.sleep_summaries == other.sleep_summaries
                and self.sync_events == other.sync_events
                and self.outcome == other.outcome
                and self.lace_inputs == other.lace_inputs)

    def __hash__(self):
        return hash((self.patient_id, self.monitoring_start, self.monitoring_end))
