"""
Feature-vector assembly over day windows, and the feature matrix.
"""

import json
import logging
from dataclasses import dataclass, field
from datetime import timedelta

import numpy as np
import pandas as pd

from deteriorate.errors import DomainError
from deteriorate.Features.catalog import FEATURE_CATALOG, SUMMARY_STATS, build_catalog, feature_names
from deteriorate.Features.segmentation import awake_window_of_day, sedentary_bouts_of_day
from deteriorate.Features.statistics import (
    COOCCURRENCE_FEATURES,
    cooccurrence_features,
    dfa_fluctuation,
    first_order_stats,
)
from deteriorate.Ingest.records import MINUTES_PER_DAY, SleepEpisodeSummary, day_start_minute
from deteriorate.settings import FeatureConfig

logger = logging.getLogger(__name__)


def quantization_range(cohort):
    """Heart-rate (min, max) over a cohort, the co-occurrence quantization range."""
    values = [record.heart_rate.values for record in cohort if len(record.heart_rate)]
    if not values:
        raise DomainError("no heart-rate samples to derive a quantization range from")
    values = np.concatenate(values)
    return float(values.min()), float(values.max())


@dataclass
class FeatureVector:
    """Catalog values of one example; missing entries are NaN and listed in ``missing``."""

    example_id: str
    values: dict
    missing: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        self.missing = frozenset(name for name, value in self.values.items()
                                 if value is None or not np.isfinite(value)) | self.missing
        self.values = {name: (float("nan") if name in self.missing else float(value))
                       for name, value in self.values.items()}


class FeatureExtractor:
    """
    Computes catalog features for day windows of one patient.

    Per-minute streams are laid out as (n_days, 1440) arrays with NaN for
    missing minutes; awake windows are computed once per day.
    """

    def __init__(self, record, config=None, hr_range=None):
        self.record = record
        self.config = config if config is not None else FeatureConfig()
        self.catalog = build_catalog(self.config)
        self.n_days = record.n_days
        self.origin = day_start_minute(record.monitoring_start)
        self.steps = self._day_matrix(record.steps)
        self.heart_rate = self._day_matrix(record.heart_rate)
        self.sleep_status = self._day_matrix(record.sleep_status)
        if hr_range is None and len(record.heart_rate):
            hr_range = (float(record.heart_rate.values.min()), float(record.heart_rate.values.max()))
        self.hr_range = hr_range
        self._windows = {}

    def _day_matrix(self, series):
        out = np.full(self.n_days * MINUTES_PER_DAY, np.nan)
        out[series.minutes - self.origin] = series.values
        return out.reshape(self.n_days, MINUTES_PER_DAY)

    def day_index(self, day):
        index = (day - self.record.monitoring_start).days
        if not 0 <= index < self.n_days:
            raise DomainError(f"{day} outside the monitoring span of {self.record.patient_id}")
        return index

    def awake_window(self, index):
        if index not in self._windows:
            day = self.record.monitoring_start + timedelta(days=index)
            self._windows[index] = awake_window_of_day(self.steps[index], day, self.config)
        return self._windows[index]

    def day_has_data(self, index):
        """True when any per-minute stream has a sample on that day."""
        return bool(np.isfinite(self.steps[index]).any()
                    or np.isfinite(self.heart_rate[index]).any()
                    or np.isfinite(self.sleep_status[index]).any())

    def step_features(self, first, last):
        totals, bout_counts, sedentary, active, observed = [], [], [], 0, 0
        for index in range(first, last + 1):
            window = self.awake_window(index)
            if window is None:
                continue
            segment = self.steps[index, window.awake_minute:window.sleep_minute]
            bouts = sedentary_bouts_of_day(self.steps[index], window)
            totals.append(np.nansum(segment))
            bout_counts.append(len(bouts))
            sedentary.append(sum(bout.duration for bout in bouts))
            active += int(np.count_nonzero(segment > 0))
            observed += int(np.count_nonzero(np.isfinite(segment)))
        if not totals:
            return {}
        return {
            "step_daily_min": min(totals),
            "step_daily_max": max(totals),
            "step_daily_mean": float(np.mean(totals)),
            "activity_quality": active / observed if observed else float("nan"),
            "sedentary_bout_count_daily_mean": float(np.mean(bout_counts)),
            "sedentary_bout_count_daily_min": min(bout_counts),
            "sedentary_bout_count_daily_max": max(bout_counts),
            "sedentary_minutes_per_bout": (sum(sedentary) / sum(bout_counts)
                                           if sum(bout_counts) else float("nan")),
            "sedentary_minutes_daily_mean": float(np.mean(sedentary)),
        }

    def _dfa(self, values, window):
        try:
            return dfa_fluctuation(values, window, self.config.dfa_small_scale_correction)
        except DomainError:
            return float("nan")

    def heart_rate_features(self, first, last):
        minutes = self.heart_rate[first:last + 1].ravel()
        observed = minutes[np.isfinite(minutes)]
        if observed.size == 0:
            return {}
        values = {f"hr_{name}": value for name, value in first_order_stats(observed).items()}
        if minutes.size > self.config.lag:
            texture = cooccurrence_features(minutes, self.config.quantization_levels,
                                            self.config.lag, self.hr_range)
            values.update({f"hr_{name}": value for name, value in texture.items()})
        for window in self.config.hr_dfa_windows:
            values[f"hr_dfa_{window}"] = self._dfa(observed, window)
        return values

    def sleep_features(self, first, last):
        values = {}
        minutes = self.sleep_status[first:last + 1].ravel()
        observed = minutes[np.isfinite(minutes)]
        if observed.size:
            stats = first_order_stats(observed)
            values["sleep_status_skewness"] = stats["skewness"]
            values["sleep_status_kurtosis"] = stats["kurtosis"]
            for window in self.config.sleep_dfa_windows:
                values[f"sleep_dfa_{window}"] = self._dfa(observed, window)

        first_day = self.record.monitoring_start + timedelta(days=first)
        last_day = self.record.monitoring_start + timedelta(days=last)
        summaries = [s for s in self.record.sleep_summaries
                     if first_day <= s.episode_date <= last_day]
        if summaries:
            table = pd.DataFrame([{name: getattr(s, name) for name in SleepEpisodeSummary.FIELDS}
                                  for s in summaries], dtype=float)
            for name in SleepEpisodeSummary.FIELDS:
                for stat in SUMMARY_STATS:
                    values[f"{name}_{stat}"] = float(getattr(table[name], stat)())
            in_bed = table["time_in_bed"] > 0
            if in_bed.any():
                values["sleep_efficiency"] = float(
                    (table.loc[in_bed, "minutes_asleep"] / table.loc[in_bed, "time_in_bed"]).mean())
        return values

    def features(self, first, last, example_id=None):
        """FeatureVector over day indices first..last inclusive."""
        if not 0 <= first <= last < self.n_days:
            raise DomainError(f"day window [{first}, {last}] outside the monitoring span "
                              f"of {self.record.patient_id}")
        values = {}
        values.update(self.step_features(first, last))
        values.update(self.heart_rate_features(first, last))
        values.update(self.sleep_features(first, last))
        row = {spec.name: values.get(spec.name, float("nan")) for spec in self.catalog}
        if example_id is None:
            start = self.record.monitoring_start
            example_id = (f"{self.record.patient_id}:{start + timedelta(days=first)}:"
                          f"{start + timedelta(days=last)}")
        return FeatureVector(example_id, row)


def assemble_daily_features(record, date_window, config=None, hr_range=None, extractor=None):
    """
    Catalog features of one patient over a window of calendar days.

    Args:
        record (PatientRecord): the patient
        date_window (tuple): (first date, last date), inclusive
        config (FeatureConfig, optional): extraction parameters
        hr_range (tuple, optional): heart-rate quantization range; the
            record's own range when omitted
        extractor (FeatureExtractor, optional): reused per-record state

    Returns:
        FeatureVector
    """
    extractor = extractor if extractor is not None else FeatureExtractor(record, config, hr_range)
    first, last = date_window
    return extractor.features(extractor.day_index(first), extractor.day_index(last))


def assemble_patient_features(record, first_k_days, config=None, hr_range=None, extractor=None):
    """Catalog features over the first k monitored days of a patient."""
    if not 1 <= first_k_days <= record.n_days:
        raise DomainError(f"k = {first_k_days} days exceeds the {record.n_days}-day span "
                          f"of {record.patient_id}")
    extractor = extractor if extractor is not None else FeatureExtractor(record, config, hr_range)
    return extractor.features(0, first_k_days - 1, example_id=record.patient_id)


TEXTURE_FEATURES = tuple(f"hr_{name}" for name in COOCCURRENCE_FEATURES)


class TextureSource:
    """
    Heart-rate windows behind the co-occurrence columns of a feature matrix.

    Those columns depend on the quantization range, which must come from the
    training examples of each fold; the source recomputes them for any range
    and keeps one table per range seen.

    Attributes:
        windows (list[tuple]): (extractor, first day, last day) per source row
        row_min (np.ndarray): heart-rate minimum per row, NaN without samples
        row_max (np.ndarray): heart-rate maximum per row, NaN without samples
    """

    def __init__(self, windows):
        self.windows = list(windows)
        self.row_min = np.full(len(self.windows), np.nan)
        self.row_max = np.full(len(self.windows), np.nan)
        for row, (extractor, first, last) in enumerate(self.windows):
            minutes = extractor.heart_rate[first:last + 1]
            if np.isfinite(minutes).any():
                self.row_min[row] = np.nanmin(minutes)
                self.row_max[row] = np.nanmax(minutes)
        self._tables = {}

    def __len__(self):
        return len(self.windows)

    def value_range(self, rows):
        """Heart-rate (min, max) over the given source rows, None without samples."""
        low, high = self.row_min[rows], self.row_max[rows]
        if np.isnan(low).all():
            return None
        return float(np.nanmin(low)), float(np.nanmax(high))

    def table(self, value_range):
        """Co-occurrence features of every source row under one quantization range."""
        key = tuple(float(bound) for bound in value_range)
        if key not in self._tables:
            rows = np.full((len(self.windows), len(TEXTURE_FEATURES)), np.nan)
            for row, (extractor, first, last) in enumerate(self.windows):
                if np.isnan(self.row_min[row]):
                    continue
                minutes = extractor.heart_rate[first:last + 1].ravel()
                if minutes.size <= extractor.config.lag:
                    continue
                texture = cooccurrence_features(minutes, extractor.config.quantization_levels,
                                                extractor.config.lag, key)
                rows[row] = [texture[name] for name in COOCCURRENCE_FEATURES]
            self._tables[key] = rows
            logger.debug("co-occurrence table for range %s over %d rows", key, len(self.windows))
        return self._tables[key]


class FeatureMatrix:
    """
    Examples x features table with its missing-entry mask.

    Attributes:
        values (pd.DataFrame): feature values, NaN where missing before
            imputation
        mask (pd.DataFrame): True where the entry was originally missing
        texture (TextureSource | None): heart-rate windows behind the
            co-occurrence columns, when they can be requantized
        rows (np.ndarray | None): source row of each example
    """

    def __init__(self, values, mask=None, texture=None, rows=None):
        self.values = values
        self.mask = mask if mask is not None else values.isna()
        self.texture = texture
        self.rows = np.asarray(rows if rows is not None else np.arange(len(values)), dtype=int)
        if texture is not None and len(self.rows) != len(values):
            raise DomainError(f"{len(self.rows)} texture rows for {len(values)} examples")

    @classmethod
    def from_vectors(cls, vectors, columns=None, texture=None, rows=None):
        columns = columns if columns is not None else [spec.name for spec in FEATURE_CATALOG]
        frame = pd.DataFrame([[v.values.get(c, np.nan) for c in columns] for v in vectors],
                             index=pd.Index([v.example_id for v in vectors], name="example_id"),
                             columns=columns, dtype=float)
        mask = pd.DataFrame([[c in v.missing or c not in v.values for c in columns] for v in vectors],
                            index=frame.index, columns=columns, dtype=bool)
        return cls(frame, mask, texture, rows)

    def __len__(self):
        return len(self.values)

    @property
    def columns(self):
        return list(self.values.columns)

    def select(self, columns):
        return FeatureMatrix(self.values[list(columns)], self.mask[list(columns)], self.texture, self.rows)

    def restrict_tags(self, tags, catalog=FEATURE_CATALOG):
        allowed = set(feature_names(catalog, tags))
        return self.select([c for c in self.columns if c in allowed])

    def take(self, positions):
        return FeatureMatrix(self.values.iloc[positions], self.mask.iloc[positions],
                             self.texture, self.rows[positions])

    def quantization_range(self, positions=None):
        """
        Heart-rate range of the examples at ``positions`` (all when omitted).

        Returns:
            tuple | None: None when the matrix cannot be requantized or the
                examples hold no heart-rate sample
        """
        if self.texture is None or not any(c in TEXTURE_FEATURES for c in self.columns):
            return None
        rows = self.rows if positions is None else self.rows[positions]
        return self.texture.value_range(rows)

    def requantized(self, value_range):
        """
        Copy with the co-occurrence columns recomputed under ``value_range``.

        The copy is detached from its texture source, so a fold cannot
        requantize it a second time.
        """
        columns = [c for c in self.columns if c in TEXTURE_FEATURES]
        if self.texture is None or value_range is None or not columns:
            return FeatureMatrix(self.values, self.mask)
        table = self.texture.table(value_range)[self.rows]
        texture = pd.DataFrame(table, index=self.values.index, columns=list(TEXTURE_FEATURES))
        values, mask = self.values.copy(), self.mask.copy()
        values[columns] = texture[columns]
        mask[columns] = texture[columns].isna()
        return FeatureMatrix(values, mask)

    def to_numpy(self):
        return self.values.to_numpy(dtype=float)

    def export(self, csv_path, mask_path):
        """Write the values CSV and the sidecar JSON missing-mask."""
        self.values.to_csv(csv_path, float_format="%.10g")
        missing = {example: [c for c in self.columns if row[c]]
                   for example, row in self.mask.iterrows()}
        with open(mask_path, "w", encoding="utf-8") as file:
            json.dump({"columns": self.columns, "missing": missing}, file, indent=2, sort_keys=True)
            file.write("\n")
