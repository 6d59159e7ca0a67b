"""Shared fixtures."""

from datetime import date, timedelta

import numpy as np
import pytest

from deteriorate.Ingest.records import (
    Modality,
    OutcomeLabel,
    PatientRecord,
    SampleSeries,
    day_start_minute,
)
from deteriorate.Ingest.synthetic import generate_synthetic_cohort
from deteriorate.settings import SynthConfig

START = date(2017, 1, 2)


@pytest.fixture
def series_factory():
    """Build a SampleSeries from minute offsets after midnight of START."""
    def build(modality, offsets, values, day=START):
        origin = day_start_minute(day)
        return SampleSeries(Modality(modality), origin + np.asarray(offsets, dtype=np.int64),
                            np.asarray(values, dtype=float))
    return build


@pytest.fixture
def record_factory():
    """Build a PatientRecord; missing streams are empty."""
    def build(patient_id="T001", n_days=1, heart_rate=None, steps=None, sleep_status=None,
              events=(), **kwargs):
        return PatientRecord(
            patient_id=patient_id,
            monitoring_start=START,
            monitoring_end=START + timedelta(days=n_days - 1),
            heart_rate=heart_rate if heart_rate is not None else SampleSeries.empty(Modality.HEART_RATE),
            steps=steps if steps is not None else SampleSeries.empty(Modality.STEP),
            sleep_status=(sleep_status if sleep_status is not None
                          else SampleSeries.empty(Modality.SLEEP_STATUS)),
            outcome=OutcomeLabel(tuple(START + timedelta(days=d) for d in events)),
            **kwargs,
        )
    return build


@pytest.fixture(scope="session")
def small_config():
    return SynthConfig(n_patients=6, n_deteriorated=2, days_per_patient=14, n_without_sleep=1,
                       rng_seed=3)


@pytest.fixture(scope="session")
def small_cohort(small_config):
    return generate_synthetic_cohort(small_config)
