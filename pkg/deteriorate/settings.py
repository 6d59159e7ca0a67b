"""
Configuration files.

Every workflow is driven by one JSON file mapped onto a dataclass. Unknown
keys and out-of-range values raise ConfigError; a missing file is an error
too, since a silently defaulted run would not be reproducible.
"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from datetime import date

from deteriorate.errors import ConfigError

logger = logging.getLogger(__name__)

MODALITY_TAGS = ("Step", "HR", "Sleep")
LABEL_MODES = ("exact", "within")
EARLY_WARNING_MODELS = ("weighted_ocsvm", "ocsvm", "lof", "kmeans")
RISK_MODELS = ("knn", "logreg")


def load_json(path):
    """Read a JSON object from a file, raising ConfigError on failure."""
    try:
        with open(path, "r", encoding="utf-8") as file:
            data = json.load(file)
    except FileNotFoundError as error:
        raise ConfigError(f"config file not found: {path}") from error
    except json.JSONDecodeError as error:
        raise ConfigError(f"JSON decoding error in {path}: {error}") from error
    except OSError as error:
        raise ConfigError(f"OS error when reading {path}: {error}") from error
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    logger.debug("loaded config %s", path)
    return data


class _ConfigMixin:
    """from_dict/to_dict shared by the config dataclasses."""

    # fields stored as tuples but written as JSON arrays
    _TUPLE_FIELDS = ()

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"{cls.__name__}: unknown key(s) {', '.join(unknown)}")
        values = dict(data)
        for name in cls._TUPLE_FIELDS:
            if name in values and values[name] is not None:
                values[name] = tuple(values[name])
        try:
            return cls(**values)
        except TypeError as error:
            raise ConfigError(f"{cls.__name__}: {error}") from error

    @classmethod
    def load(cls, path=None):
        """Load from a JSON file, or return defaults when path is None."""
        if path is None:
            return cls()
        return cls.from_dict(load_json(path))

    def to_dict(self):
        data = asdict(self)
        for name in self._TUPLE_FIELDS:
            if data.get(name) is not None:
                data[name] = list(data[name])
        return data


def _check(condition, message):
    if not condition:
        raise ConfigError(message)


@dataclass
class SynthConfig(_ConfigMixin):
    """
    Parameters of the synthetic cohort generator.

    ``anomaly_signal_strength`` scales the pre-event signal injected in the
    three days before each deterioration date; outside those days every
    patient is drawn from the same distribution. ``chronic_signal_ratio`` is
    an ablation knob, off by default: the fraction of the signal
    deteriorating patients carry over their whole monitoring period. Both
    vanish when the strength is 0.
    """

    n_patients: int = 25
    n_deteriorated: int = 7
    days_per_patient: int = 30
    anomaly_signal_strength: float = 1.0
    chronic_signal_ratio: float = 0.0
    signal_modalities: tuple = ("heart_rate", "steps", "sleep_status")
    missingness: dict = field(default_factory=lambda: {
        "heart_rate": 0.05, "steps": 0.02, "sleep_status": 0.1})
    n_without_sleep: int = 4
    sync_cadence: int = 15
    delay_noise_scale: float = 5.0
    contamination_rate: float = 0.0
    start_date: str = "2017-01-02"
    rng_seed: int = 0

    _TUPLE_FIELDS = ("signal_modalities",)

    def __post_init__(self):
        _check(self.n_patients >= 1, "n_patients must be at least 1")
        _check(self.days_per_patient >= 1, "days_per_patient must be at least 1")
        _check(0 <= self.n_deteriorated <= self.n_patients,
               "n_deteriorated must lie in [0, n_patients]")
        _check(self.anomaly_signal_strength >= 0, "anomaly_signal_strength must be >= 0")
        _check(self.chronic_signal_ratio >= 0, "chronic_signal_ratio must be >= 0")
        _check(0 <= self.n_without_sleep <= self.n_patients,
               "n_without_sleep must lie in [0, n_patients]")
        _check(self.sync_cadence >= 1, "sync_cadence must be at least 1 minute")
        _check(self.delay_noise_scale >= 0, "delay_noise_scale must be >= 0")
        _check(0 <= self.contamination_rate <= 1, "contamination_rate must lie in [0, 1]")
        known = ("heart_rate", "steps", "sleep_status")
        for name in self.signal_modalities:
            _check(name in known, f"unknown signal modality {name!r}")
        for name, rate in self.missingness.items():
            _check(name in known, f"unknown missingness modality {name!r}")
            _check(0 <= rate <= 1, f"missingness rate of {name} must lie in [0, 1]")
        try:
            date.fromisoformat(self.start_date)
        except ValueError as error:
            raise ConfigError(f"start_date: {error}") from error

    @property
    def first_day(self):
        return date.fromisoformat(self.start_date)


@dataclass
class PipelineConfig(_ConfigMixin):
    """Data-quality report and compliance-alert parameters."""

    sampling_period: int = 1
    min_daily_heart_rate: int = 5400
    min_battery: str = "medium"
    yield_level: float = 0.8
    storage_horizon_days: int = 7
    percentile: float = 95.0

    def __post_init__(self):
        _check(self.sampling_period >= 1, "sampling_period must be at least 1 minute")
        _check(self.min_daily_heart_rate >= 0, "min_daily_heart_rate must be >= 0")
        _check(self.min_battery in ("empty", "low", "medium", "high"),
               f"unknown battery level {self.min_battery!r}")
        _check(0 <= self.yield_level <= 1, "yield_level must lie in [0, 1]")
        _check(0 < self.percentile <= 100, "percentile must lie in (0, 100]")


@dataclass
class FeatureConfig(_ConfigMixin):
    """Feature-extraction parameters; clock values are minutes after midnight."""

    quantization_levels: int = 16
    lag: int = 1
    hr_dfa_windows: tuple = (10,)
    sleep_dfa_windows: tuple = (60, 120, 360)
    dfa_small_scale_correction: bool = True
    awake_after: int = 7 * 60
    sleep_after: int = 19 * 60
    lull_minutes: int = 30
    lull_steps: int = 10

    _TUPLE_FIELDS = ("hr_dfa_windows", "sleep_dfa_windows")

    def __post_init__(self):
        _check(2 <= self.quantization_levels <= 254, "quantization_levels must lie in [2, 254]")
        _check(self.lag >= 1, "lag must be at least 1")
        for window in self.hr_dfa_windows + self.sleep_dfa_windows:
            _check(window >= 4, "DFA windows must be at least 4 minutes")
        _check(0 <= self.awake_after < self.sleep_after <= 1440,
               "awake_after must precede sleep_after within the day")
        _check(self.lull_minutes >= 1, "lull_minutes must be at least 1")


@dataclass
class ExperimentConfig(_ConfigMixin):
    """
    Early-warning and risk-prediction experiment parameters.

    ``models`` lists the early-warning models compared per (w, h) cell; the
    risk experiment always runs KNN and logistic regression plus LACE.
    """

    models: tuple = EARLY_WARNING_MODELS
    windows: tuple = (1, 2, 3, 4, 5, 6, 7)
    horizons: tuple = (1, 2, 3, 4, 5, 6, 7)
    label_mode: str = "exact"
    repeats: int = 100
    seed: int = 0
    nu: float = 0.09
    beta: float = 0.95
    kernel: str = "rbf"
    gamma: float = None
    lof_neighbors: int = 20
    kmeans_clusters: int = 2
    knn_k: int = 2
    logreg_c: float = 1.0
    k_folds: int = 5
    k_days: int = 20
    ablation_days: tuple = (5, 10, 15, 20)
    modalities: tuple = MODALITY_TAGS
    feature_selection: bool = True
    target_sensitivity: float = 0.95
    workers: int = None
    features: FeatureConfig = field(default_factory=FeatureConfig)

    _TUPLE_FIELDS = ("models", "windows", "horizons", "ablation_days", "modalities")

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if isinstance(data.get("features"), dict):
            data["features"] = FeatureConfig.from_dict(data["features"])
        return super().from_dict(data)

    def __post_init__(self):
        for name in self.models:
            _check(name in EARLY_WARNING_MODELS + RISK_MODELS + ("majority",),
                   f"unknown model {name!r}")
        for value in self.windows + self.horizons:
            _check(1 <= value <= 7, "windows and horizons must lie in [1, 7]")
        _check(self.label_mode in LABEL_MODES, f"label_mode must be one of {LABEL_MODES}")
        _check(self.repeats >= 1, "repeats must be at least 1")
        _check(0 < self.nu <= 1, "nu must lie in (0, 1]")
        _check(0 < self.beta <= 1, "beta must lie in (0, 1]")
        _check(self.kernel in ("rbf", "linear"), "kernel must be 'rbf' or 'linear'")
        _check(self.gamma is None or self.gamma > 0, "gamma must be positive")
        _check(self.lof_neighbors >= 1, "lof_neighbors must be at least 1")
        _check(self.kmeans_clusters >= 1, "kmeans_clusters must be at least 1")
        _check(self.knn_k >= 1, "knn_k must be at least 1")
        _check(self.logreg_c > 0, "logreg_c must be positive")
        _check(self.k_folds >= 2, "k_folds must be at least 2")
        _check(self.k_days is None or self.k_days >= 1, "k_days must be at least 1")
        _check(len(self.modalities) > 0, "modalities must not be empty")
        for tag in self.modalities:
            _check(tag in MODALITY_TAGS, f"unknown modality tag {tag!r}")
        _check(0 <= self.target_sensitivity <= 1, "target_sensitivity must lie in [0, 1]")
        _check(self.workers is None or self.workers >= 1, "workers must be at least 1")

    def to_dict(self):
        data = super().to_dict()
        data["features"] = self.features.to_dict()
        return data
