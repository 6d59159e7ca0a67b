"""Ingest module initialization"""
from .records import (
    BatteryLevel,
    Modality,
    OutcomeLabel,
    PatientRecord,
    SampleSeries,
    SleepEpisodeSummary,
    SleepLevel,
    SyncEvent,
    TimedSample,
    TimeSpan,
)
from .parsing import ParseReport, parse_intraday, serialize_intraday
from .cohort import load_cohort, write_cohort
from .synthetic import generate_synthetic_cohort

__all__ = [
    'BatteryLevel', 'Modality', 'OutcomeLabel', 'PatientRecord', 'SampleSeries',
    'SleepEpisodeSummary', 'SleepLevel', 'SyncEvent', 'TimedSample', 'TimeSpan',
    'ParseReport', 'parse_intraday', 'serialize_intraday',
    'load_cohort', 'write_cohort', 'generate_synthetic_cohort',
]
