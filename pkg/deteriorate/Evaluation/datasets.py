"""
Datasets for the two prediction tasks.

Early warning: each w-day window of a patient is one example, positive
when a deterioration event falls h days after the window end (``exact``
mode) or within the next h days (``within`` mode).

Risk prediction: each patient is one example built from the first k days
of monitoring, positive when the patient deteriorated.
"""

import logging
from dataclasses import dataclass
from datetime import timedelta

import numpy as np

from deteriorate.errors import DomainError
from deteriorate.Features.assembly import (
    FeatureExtractor,
    FeatureMatrix,
    TextureSource,
    assemble_patient_features,
    quantization_range,
)
from deteriorate.Features.catalog import build_catalog
from deteriorate.settings import LABEL_MODES, FeatureConfig

logger = logging.getLogger(__name__)


def window_label(window_end, horizon, event_dates, label_mode="exact"):
    """Early-warning label of a window ending on ``window_end``."""
    if label_mode == "exact":
        return int(window_end + timedelta(days=horizon) in event_dates)
    if label_mode == "within":
        last = window_end + timedelta(days=horizon)
        return int(any(window_end < event <= last for event in event_dates))
    raise DomainError(f"label mode must be one of {LABEL_MODES}")


@dataclass
class EarlyWarningDataset:
    matrix: FeatureMatrix
    labels: np.ndarray
    patient_ids: tuple
    window_ends: tuple
    window: int
    horizon: int
    label_mode: str

    def __len__(self):
        return len(self.labels)

    @property
    def n_anomalies(self):
        return int(self.labels.sum())

    @property
    def n_normals(self):
        return int(len(self.labels) - self.labels.sum())


class EarlyWarningBuilder:
    """
    Builds early-warning datasets for many (w, h) pairs of one cohort.

    Window features depend on w only, so they are computed once per w and
    relabelled for every horizon. The co-occurrence columns are first
    quantized over the whole cohort; the evaluation protocols requantize
    them per split from the training windows.
    """

    def __init__(self, cohort, config=None):
        if not cohort:
            raise DomainError("cohort is empty")
        self.cohort = list(cohort)
        self.config = config if config is not None else FeatureConfig()
        hr_range = quantization_range(self.cohort)
        self.extractors = [FeatureExtractor(record, self.config, hr_range) for record in self.cohort]
        self._windows = {}

    def _window_features(self, window):
        if window not in self._windows:
            vectors, meta, spans = [], [], []
            for extractor in self.extractors:
                record = extractor.record
                has_data = [extractor.day_has_data(i) for i in range(extractor.n_days)]
                for last in range(window - 1, extractor.n_days):
                    first = last - window + 1
                    if not all(has_data[first:last + 1]):
                        continue
                    vectors.append(extractor.features(first, last))
                    meta.append((record, last))
                    spans.append((extractor, first, last))
            self._windows[window] = (vectors, meta, TextureSource(spans))
            logger.debug("w=%d: %d windows", window, len(vectors))
        return self._windows[window]

    def build(self, window, horizon, label_mode="exact"):
        if window < 1 or horizon < 1:
            raise DomainError("window and horizon must be at least 1 day")
        vectors, meta, texture = self._window_features(window)
        keep, labels, ids, ends = [], [], [], []
        for position, (record, last) in enumerate(meta):
            # Outcomes past the monitoring span are unobserved
            if last + horizon >= record.n_days:
                continue
            end = record.monitoring_start + timedelta(days=last)
            keep.append(position)
            labels.append(window_label(end, horizon, record.outcome.deterioration_dates, label_mode))
            ids.append(record.patient_id)
            ends.append(end)
        matrix = FeatureMatrix.from_vectors([vectors[i] for i in keep],
                                            columns=[spec.name for spec in self.extractors[0].catalog],
                                            texture=texture, rows=keep)
        dataset = EarlyWarningDataset(matrix, np.asarray(labels, dtype=int), tuple(ids), tuple(ends),
                                      window, horizon, label_mode)
        logger.info("Early-warning dataset w=%d h=%d (%s): %d normal, %d deteriorated",
                    window, horizon, label_mode, dataset.n_normals, dataset.n_anomalies)
        return dataset


def build_early_warning_dataset(cohort, window, horizon, label_mode="exact", config=None):
    """
    Sliding-window early-warning dataset.

    Args:
        cohort (list[PatientRecord]): patients
        window (int): window length w in days
        horizon (int): prediction horizon h in days
        label_mode (str): 'exact' or 'within'
        config (FeatureConfig, optional): extraction parameters

    Returns:
        EarlyWarningDataset
    """
    return EarlyWarningBuilder(cohort, config).build(window, horizon, label_mode)


@dataclass
class PatientDataset:
    matrix: FeatureMatrix
    labels: np.ndarray
    patient_ids: tuple
    lace_inputs: tuple
    k_days: int

    def __len__(self):
        return len(self.labels)


def patient_dataset(cohort, k_days=None, config=None):
    """
    Risk-prediction dataset: one example per patient over its first k days.

    ``k_days=None`` uses each patient's full monitoring span. As for early
    warning, the co-occurrence columns are requantized per training fold.
    """
    if not cohort:
        raise DomainError("cohort is empty")
    config = config if config is not None else FeatureConfig()
    hr_range = quantization_range(cohort)
    extractors = [FeatureExtractor(record, config, hr_range) for record in cohort]
    vectors = [assemble_patient_features(e.record, k_days or e.n_days, extractor=e) for e in extractors]
    texture = TextureSource([(e, 0, (k_days or e.n_days) - 1) for e in extractors])
    columns = [spec.name for spec in build_catalog(config)]
    return PatientDataset(
        matrix=FeatureMatrix.from_vectors(vectors, columns=columns, texture=texture),
        labels=np.asarray([int(r.outcome.deteriorated) for r in cohort], dtype=int),
        patient_ids=tuple(r.patient_id for r in cohort),
        lace_inputs=tuple(r.lace_inputs for r in cohort),
        k_days=k_days,
    )
