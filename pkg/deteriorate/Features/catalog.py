"""
Feature catalog: ordered feature names with their modality tag.

The tag (Step, HR or Sleep) drives modality ablations.
"""

import json
from dataclasses import asdict, dataclass

from deteriorate.errors import DomainError
from deteriorate.Features.statistics import COOCCURRENCE_FEATURES
from deteriorate.Ingest.records import SleepEpisodeSummary
from deteriorate.settings import MODALITY_TAGS, FeatureConfig

STEP, HR, SLEEP = MODALITY_TAGS
SUMMARY_STATS = ("min", "max", "mean")


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    tag: str
    definition: str


def build_catalog(config=None):
    """Catalog for a feature configuration (DFA windows name features)."""
    config = config if config is not None else FeatureConfig()
    specs = [
        FeatureSpec("step_daily_min", STEP, "minimum over days of awake-window step total"),
        FeatureSpec("step_daily_max", STEP, "maximum over days of awake-window step total"),
        FeatureSpec("step_daily_mean", STEP, "mean over days of awake-window step total"),
        FeatureSpec("activity_quality", STEP,
                    "fraction of observed awake minutes with a positive step count"),
        FeatureSpec("sedentary_bout_count_daily_mean", STEP, "mean daily sedentary bout count"),
        FeatureSpec("sedentary_bout_count_daily_min", STEP, "minimum daily sedentary bout count"),
        FeatureSpec("sedentary_bout_count_daily_max", STEP, "maximum daily sedentary bout count"),
        FeatureSpec("sedentary_minutes_per_bout", STEP, "sedentary minutes divided by bout count"),
        FeatureSpec("sedentary_minutes_daily_mean", STEP, "mean daily sedentary minutes"),
    ]
    for stat in ("mean", "std", "skewness", "kurtosis", "min", "max"):
        specs.append(FeatureSpec(f"hr_{stat}", HR, f"first-order {stat} of heart rate"))
    for name in COOCCURRENCE_FEATURES:
        specs.append(FeatureSpec(f"hr_{name}", HR, f"co-occurrence {name} of heart rate"))
    for window in config.hr_dfa_windows:
        specs.append(FeatureSpec(f"hr_dfa_{window}", HR, f"DFA of heart rate, {window}-minute window"))
    for stat in ("skewness", "kurtosis"):
        specs.append(FeatureSpec(f"sleep_status_{stat}", SLEEP, f"first-order {stat} of sleep status"))
    for window in config.sleep_dfa_windows:
        specs.append(FeatureSpec(f"sleep_dfa_{window}", SLEEP,
                                 f"DFA of sleep status, {window}-minute window"))
    specs.append(FeatureSpec("sleep_efficiency", SLEEP, "mean of minutes asleep / time in bed"))
    for field in SleepEpisodeSummary.FIELDS:
        for stat in SUMMARY_STATS:
            specs.append(FeatureSpec(f"{field}_{stat}", SLEEP, f"{stat} of sleep-summary {field}"))
    return tuple(specs)


FEATURE_CATALOG = build_catalog()


def feature_names(catalog=FEATURE_CATALOG, tags=MODALITY_TAGS):
    """Names of catalog features whose tag is in ``tags``, in catalog order."""
    tags = tuple(tags)
    if not tags:
        raise DomainError("modality subset must not be empty")
    unknown = set(tags) - set(MODALITY_TAGS)
    if unknown:
        raise DomainError(f"unknown modality tag(s): {', '.join(sorted(unknown))}")
    return [spec.name for spec in catalog if spec.tag in tags]


def tag_of(name, catalog=FEATURE_CATALOG):
    for spec in catalog:
        if spec.name == name:
            return spec.tag
    raise DomainError(f"unknown feature {name!r}")


def catalog_manifest(catalog=FEATURE_CATALOG):
    return {"n_features": len(catalog), "features": [asdict(spec) for spec in catalog]}


def write_catalog_manifest(path, catalog=FEATURE_CATALOG):
    with open(path, "w", encoding="utf-8") as file:
        json.dump(catalog_manifest(catalog), file, indent=2, sort_keys=True)
        file.write("\n")
