"""
Awake-window segmentation and sedentary bouts.

Works on one calendar day of per-minute step counts laid out as a length-1440
array with NaN for missing minutes. Minute indices are minutes after
midnight UTC.
"""

from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone

import numpy as np

from deteriorate.Ingest.records import MINUTES_PER_DAY, day_start_minute
from deteriorate.Pipeline.metrics import runs
from deteriorate.settings import FeatureConfig


@dataclass(frozen=True)
class AwakeWindow:
    """Awake part of a day, [awake_minute, sleep_minute) after midnight."""

    date: date
    awake_minute: int
    sleep_minute: int

    @property
    def awake_time(self):
        return _instant(self.date, self.awake_minute)

    @property
    def sleep_time(self):
        return _instant(self.date, self.sleep_minute)

    @property
    def minutes(self):
        return self.sleep_minute - self.awake_minute


@dataclass(frozen=True)
class SedentaryBout:
    """Maximal run of observed zero-step minutes inside an awake window."""

    date: date
    start: int
    end: int

    @property
    def duration(self):
        return self.end - self.start


def _instant(day, minute):
    return datetime.combine(day, datetime.min.time(), tzinfo=timezone.utc) + timedelta(minutes=minute)


def day_array(series, day):
    """Per-minute values of one day, NaN where no sample exists."""
    start = day_start_minute(day)
    out = np.full(MINUTES_PER_DAY, np.nan)
    inside = series.between(start, start + MINUTES_PER_DAY)
    out[inside.minutes - start] = inside.values
    return out


def awake_window_of_day(day_steps, day, config=None):
    """
    Awake window of one day's step array.

    The window opens at the first minute at or after ``config.awake_after``
    with a positive step count, and closes at the first instant at or after
    ``config.sleep_after`` whose preceding ``lull_minutes`` minutes hold fewer
    than ``lull_steps`` steps in total (missing minutes count as zero).
    Without such a lull the window closes at midnight.

    Returns:
        AwakeWindow | None: None when no step is taken after awake_after
    """
    config = config if config is not None else FeatureConfig()
    stepping = np.flatnonzero(day_steps[config.awake_after:] > 0)
    if stepping.size == 0:
        return None
    awake = config.awake_after + int(stepping[0])

    cumulative = np.concatenate(([0.0], np.cumsum(np.nan_to_num(day_steps, nan=0.0))))
    instants = np.arange(max(config.sleep_after, awake + 1), MINUTES_PER_DAY + 1)
    trailing = cumulative[instants] - cumulative[np.maximum(instants - config.lull_minutes, 0)]
    lulls = np.flatnonzero(trailing < config.lull_steps)
    sleep = int(instants[lulls[0]]) if lulls.size else MINUTES_PER_DAY
    return AwakeWindow(day, awake, sleep)


def segment_awake(steps, day, config=None):
    """Awake window of ``day`` from a step SampleSeries (None if undefined)."""
    return awake_window_of_day(day_array(steps, day), day, config)


def sedentary_bouts_of_day(day_steps, window):
    """Maximal observed zero-step runs inside the window; missing minutes break them."""
    segment = day_steps[window.awake_minute:window.sleep_minute]
    starts, ends, still = runs(segment == 0)
    return [SedentaryBout(window.date, window.awake_minute + int(s), window.awake_minute + int(e))
            for s, e, z in zip(starts, ends, still) if z]


def extract_sedentary_bouts(steps, window):
    """Sedentary bouts of a step SampleSeries inside an awake window."""
    return sedentary_bouts_of_day(day_array(steps, window.date), window)
