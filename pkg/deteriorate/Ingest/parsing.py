"""
Readers and writers for the cohort file formats.

Intraday CSV    ``timestamp,value`` (ISO-8601 UTC, minute precision)
Sleep summary   ``date,time_in_bed,min_to_fall_asleep,...,restless_duration``
Sync log        ``capture_time,arrival_time,battery``
Manifest        JSON array of patient entries with outcomes and LACE inputs
"""

import json
import logging
from dataclasses import dataclass, field
from datetime import date

import numpy as np
import pandas as pd

from deteriorate.errors import DomainError, OrderingError, ParseError
from deteriorate.Ingest.records import (
    HEART_RATE_BOUNDS,
    SLEEP_LEVELS,
    BatteryLevel,
    Modality,
    SampleSeries,
    SleepEpisodeSummary,
    SyncEvent,
    format_timestamp,
    from_epoch_minutes,
)
from deteriorate.Models.lace import LaceInputs

logger = logging.getLogger(__name__)

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%MZ"
INTRADAY_COLUMNS = ["timestamp", "value"]
SLEEP_COLUMNS = ["date", "time_in_bed", "min_to_fall_asleep", "min_asleep", "min_awake",
                 "min_after_wakeup", "awake_count", "restless_count", "restless_duration"]
SYNC_COLUMNS = ["capture_time", "arrival_time", "battery"]

# CSV column -> SleepEpisodeSummary attribute
_SLEEP_FIELD_MAP = dict(zip(SLEEP_COLUMNS[1:], SleepEpisodeSummary.FIELDS))

_UTC_EPOCH = pd.Timestamp("1970-01-01", tz="UTC")


@dataclass
class ParseReport:
    """Outcome of parsing one intraday file."""

    accepted: int = 0
    rejected: list = field(default_factory=list)  # (line, reason)

    def to_dict(self):
        return {"accepted": self.accepted,
                "rejected": [{"line": line, "reason": reason} for line, reason in self.rejected]}


def _read_table(file, columns):
    """Read a CSV as strings, checking the header."""
    try:
        frame = pd.read_csv(file, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=columns)
    except pd.errors.ParserError as error:
        raise ParseError(f"malformed CSV: {error}") from error
    if list(frame.columns) != columns:
        raise ParseError(f"expected header {','.join(columns)}, got {','.join(frame.columns)}",
                         line=1)
    return frame.reset_index(drop=True)


def _line_of(position):
    # header occupies line 1
    return int(position) + 2


def _first_bad(mask):
    return int(np.flatnonzero(np.asarray(mask))[0])


def _parse_instants(texts, column):
    stamps = pd.to_datetime(texts, format=TIMESTAMP_FORMAT, utc=True, errors="coerce")
    if stamps.isna().any():
        position = _first_bad(stamps.isna())
        raise ParseError(f"malformed {column} {texts.iloc[position]!r}", line=_line_of(position))
    return stamps


def _epoch_minutes(stamps):
    return ((stamps - _UTC_EPOCH) // pd.Timedelta(minutes=1)).to_numpy(dtype=np.int64)


def parse_intraday(file, modality, report=None):
    """
    Parse one per-minute intraday CSV into a SampleSeries.

    Rows whose value breaks the modality's range rule (heart rate outside
    (20, 250) bpm, negative or fractional step counts) are rejected and
    reported by line number; the series excludes them.

    Args:
        file: path or text stream
        modality (Modality | str): stream kind
        report (ParseReport, optional): filled with accepted/rejected rows

    Returns:
        SampleSeries: the accepted samples

    Raises:
        ParseError: malformed timestamp or value, with its line number
        OrderingError: timestamps not strictly increasing
        DomainError: sleep level outside {0, 1, 2, 3}
    """
    modality = Modality(modality)
    report = report if report is not None else ParseReport()
    frame = _read_table(file, INTRADAY_COLUMNS)
    if frame.empty:
        return SampleSeries.empty(modality)

    minutes = _epoch_minutes(_parse_instants(frame["timestamp"], "timestamp"))
    values = pd.to_numeric(frame["value"], errors="coerce")
    if values.isna().any():
        position = _first_bad(values.isna())
        raise ParseError(f"malformed value {frame['value'].iloc[position]!r}",
                         line=_line_of(position))
    # correctly rounded, so canonical text parses back to the same bits
    values = frame["value"].to_numpy(dtype=object).astype(np.float64)

    steps_back = np.flatnonzero(np.diff(minutes) <= 0)
    if steps_back.size:
        raise OrderingError("timestamp not after the previous row", line=_line_of(steps_back[0] + 1))

    if modality is Modality.SLEEP_STATUS:
        outside = ~np.isin(values, SLEEP_LEVELS)
        if outside.any():
            position = _first_bad(outside)
            raise DomainError(f"line {_line_of(position)}: sleep level {values[position]:g} "
                              f"not in {SLEEP_LEVELS}")
        keep = np.ones(values.size, dtype=bool)
        reason = ""
    elif modality is Modality.HEART_RATE:
        low, high = HEART_RATE_BOUNDS
        keep = (values > low) & (values < high)
        reason = f"heart rate outside ({low:g}, {high:g}) bpm"
    else:
        keep = (values >= 0) & (values == np.floor(values))
        reason = "step count not a non-negative integer"

    for position in np.flatnonzero(~keep):
        report.rejected.append((_line_of(position), f"{reason}: {values[position]:g}"))
    if report.rejected:
        logger.warning("%s: rejected %d row(s), first at line %d", modality.value,
                       len(report.rejected), report.rejected[0][0])
    report.accepted = int(keep.sum())
    return SampleSeries(modality, minutes[keep], values[keep])


def format_value(value):
    """
    Canonical text of a sample value: integers without a decimal point,
    other values in the shortest form that parses back to the same float.

    The intraday round-trip is exact on values, not on source text: rows
    already in canonical form come back byte for byte, while a source value
    such as "72.50" is written back as "72.5".
    """
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def serialize_intraday(series, file):
    """Write a SampleSeries in the intraday CSV format."""
    file.write(",".join(INTRADAY_COLUMNS) + "\n")
    for minute, value in zip(series.minutes, series.values):
        file.write(f"{format_timestamp(from_epoch_minutes(minute))},{format_value(value)}\n")


def parse_sleep_summaries(file):
    """Parse a sleep-summary CSV into a list of SleepEpisodeSummary."""
    frame = _read_table(file, SLEEP_COLUMNS)
    summaries = []
    for position, row in enumerate(frame.itertuples(index=False)):
        row = row._asdict()
        try:
            episode_date = date.fromisoformat(row["date"])
            counts = {name: int(row[column]) for column, name in _SLEEP_FIELD_MAP.items()}
            summaries.append(SleepEpisodeSummary(episode_date=episode_date, **counts))
        except (ValueError, DomainError) as error:
            raise ParseError(str(error), line=_line_of(position)) from error
    return summaries


def serialize_sleep_summaries(summaries, file):
    file.write(",".join(SLEEP_COLUMNS) + "\n")
    for summary in summaries:
        counts = [str(getattr(summary, name)) for name in SleepEpisodeSummary.FIELDS]
        file.write(",".join([summary.episode_date.isoformat()] + counts) + "\n")


def parse_sync_log(file):
    """Parse a sync-log CSV into a list of SyncEvent."""
    frame = _read_table(file, SYNC_COLUMNS)
    if frame.empty:
        return []
    captures = _parse_instants(frame["capture_time"], "capture_time")
    arrivals = _parse_instants(frame["arrival_time"], "arrival_time")
    events = []
    for position in range(len(frame)):
        try:
            events.append(SyncEvent(
                device_capture_time=captures.iloc[position].to_pydatetime(),
                cloud_arrival_time=arrivals.iloc[position].to_pydatetime(),
                battery_level=BatteryLevel.parse(frame["battery"].iloc[position]),
            ))
        except DomainError as error:
            raise ParseError(str(error), line=_line_of(position)) from error
    return events


def serialize_sync_log(events, file):
    file.write(",".join(SYNC_COLUMNS) + "\n")
    for event in events:
        file.write(f"{format_timestamp(event.device_capture_time)},"
                   f"{format_timestamp(event.cloud_arrival_time)},"
                   f"{event.battery_level.label}\n")


@dataclass(frozen=True)
class ManifestEntry:
    """One patient entry of the cohort manifest."""

    patient_id: str
    monitoring_start: date
    monitoring_end: date
    deterioration_dates: tuple
    lace: LaceInputs = None

    @classmethod
    def from_dict(cls, data):
        try:
            lace = data.get("lace")
            return cls(
                patient_id=str(data["patient_id"]),
                monitoring_start=date.fromisoformat(data["monitoring_start"]),
                monitoring_end=date.fromisoformat(data["monitoring_end"]),
                deterioration_dates=tuple(sorted(date.fromisoformat(d)
                                                 for d in data.get("deterioration_dates", []))),
                lace=LaceInputs.from_dict(lace) if lace else None,
            )
        except (KeyError, TypeError, ValueError) as error:
            raise ParseError(f"invalid manifest entry {data!r}: {error}") from error

    def to_dict(self):
        entry = {
            "patient_id": self.patient_id,
            "monitoring_start": self.monitoring_start.isoformat(),
            "monitoring_end": self.monitoring_end.isoformat(),
            "deterioration_dates": [d.isoformat() for d in self.deterioration_dates],
        }
        if self.lace is not None:
            entry["lace"] = self.lace.to_dict()
        return entry


def parse_manifest(path):
    """Load the cohort manifest JSON array."""
    try:
        with open(path, "r", encoding="utf-8") as file:
            data = json.load(file)
    except json.JSONDecodeError as error:
        raise ParseError(f"manifest is not valid JSON: {error}", line=error.lineno) from error
    if not isinstance(data, list):
        raise ParseError("manifest must be a JSON array")
    return [ManifestEntry.from_dict(item) for item in data]


def write_manifest(entries, path):
    with open(path, "w", encoding="utf-8") as file:
        json.dump([entry.to_dict() for entry in entries], file, indent=2, sort_keys=True)
        file.write("\n")
