"""
Data-collection quality metrics: yield, time-to-failure / time-to-recovery
and end-to-end latency.

Spans are either a TimeSpan or a ``(start_minute, end_minute)`` pair of
epoch minutes, half-open. A minute counts as collected when the series has
a sample stamped with it.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from deteriorate.errors import DomainError
from deteriorate.Ingest.records import MINUTES_PER_DAY, TimeSpan

logger = logging.getLogger(__name__)


def span_bounds(span):
    """Return (start_minute, end_minute) of a span, rejecting empty ones."""
    if isinstance(span, TimeSpan):
        return span.start_minute, span.end_minute
    start, end = (int(bound) for bound in span)
    if end <= start:
        raise DomainError(f"empty span [{start}, {end})")
    return start, end


def nearest_rank_percentile(values, percent):
    """Nearest-rank percentile: the smallest value with CDF >= percent/100."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float("nan")
    return float(np.percentile(values, percent, method="inverted_cdf"))


def median(values):
    """Conventional median (midpoint of the two central values for even n)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float("nan")
    return float(np.median(values))


def compute_yield(series, span, sampling_period=1):
    """
    Fraction of the expected samples collected over a span.

    Args:
        series (SampleSeries): the stream
        span (TimeSpan | tuple): half-open span
        sampling_period (int): nominal minutes between samples

    Returns:
        float: collected / expected, in [0, 1]
    """
    start, end = span_bounds(span)
    if sampling_period < 1:
        raise DomainError("sampling_period must be at least 1 minute")
    expected = (end - start) / sampling_period
    inside = series.between(start, end).minutes
    collected = np.unique((inside - start) // sampling_period).size
    return float(min(1.0, collected / expected))


def compute_sleep_yield(record):
    """Fraction of monitored days with at least one sleep summary."""
    days = set(record.days())
    covered = {summary.episode_date for summary in record.sleep_summaries} & days
    return len(covered) / len(days)


def presence_mask(series, span):
    """Boolean per-minute mask of collected minutes over the span."""
    start, end = span_bounds(span)
    mask = np.zeros(end - start, dtype=bool)
    mask[series.between(start, end).minutes - start] = True
    return mask


def runs(mask):
    """
    Maximal runs of equal values.

    Returns:
        tuple: (starts, ends, values) as arrays, ends exclusive
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, np.empty(0, dtype=bool)
    change = np.flatnonzero(mask[1:] != mask[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [mask.size]))
    return starts, ends, mask[starts]


@dataclass(frozen=True)
class GapEvent:
    """A maximal run of missing minutes, bounds in epoch minutes."""

    modality: object
    gap_start: int
    gap_end: int

    @property
    def duration(self):
        return self.gap_end - self.gap_start

    def to_dict(self):
        return {"modality": self.modality.value, "gap_start": self.gap_start,
                "gap_end": self.gap_end, "duration": self.duration}


@dataclass
class ReliabilityRows:
    """Time-to-failure and time-to-recovery durations of one series."""

    time_to_failure: list = field(default_factory=list)
    time_to_recovery: list = field(default_factory=list)
    span_days: float = 0.0

    @property
    def failures_per_day(self):
        if self.span_days == 0:
            return float("nan")
        return len(self.time_to_recovery) / self.span_days


def gap_analysis(series, span):
    """
    Partition a span into complete runs and gaps.

    Gaps touching the span boundaries count, so the TTF and TTR durations
    always sum to the span length.

    Args:
        series (SampleSeries): the stream
        span (TimeSpan | tuple): half-open span

    Returns:
        tuple: (list[GapEvent], ReliabilityRows)
    """
    start, end = span_bounds(span)
    starts, ends, present = runs(presence_mask(series, (start, end)))
    durations = (ends - starts).tolist()
    gaps = [GapEvent(series.modality, start + int(s), start + int(e))
            for s, e, p in zip(starts, ends, present) if not p]
    rows = ReliabilityRows(
        time_to_failure=[d for d, p in zip(durations, present) if p],
        time_to_recovery=[d for d, p in zip(durations, present) if not p],
        span_days=(end - start) / MINUTES_PER_DAY,
    )
    return gaps, rows


@dataclass(frozen=True)
class LatencyCdf:
    """
    Step CDF of end-to-end latencies in minutes.

    Attributes:
        latencies (np.ndarray): sorted per-event latencies
        x (np.ndarray): distinct latencies
        cum_fraction (np.ndarray): fraction of events with latency <= x
    """

    latencies: np.ndarray
    x: np.ndarray
    cum_fraction: np.ndarray

    def at(self, value):
        """CDF evaluated at ``value`` (right-continuous)."""
        count = np.searchsorted(self.latencies, value, side="right")
        return float(count / self.latencies.size)

    def median(self):
        return median(self.latencies)

    def percentile(self, percent):
        return nearest_rank_percentile(self.latencies, percent)

    def to_frame(self):
        return pd.DataFrame({"x": self.x, "cum_fraction": self.cum_fraction})


def latency_cdf(events):
    """
    Build the latency CDF of sync events.

    Raises:
        DomainError: no events
    """
    latencies = np.sort(np.array([event.latency_minutes for event in events], dtype=float))
    if latencies.size == 0:
        raise DomainError("latency CDF needs at least one sync event")
    x = np.unique(latencies)
    cum = np.searchsorted(latencies, x, side="right") / latencies.size
    return LatencyCdf(latencies, x, cum)
