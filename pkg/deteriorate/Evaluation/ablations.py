"""Modality and monitoring-length ablations of the risk-prediction protocol."""

import logging
from itertools import combinations

import pandas as pd

from deteriorate.errors import DomainError
from deteriorate.Evaluation.datasets import patient_dataset
from deteriorate.Evaluation.protocols import repeated_kfold
from deteriorate.Features.catalog import build_catalog
from deteriorate.settings import MODALITY_TAGS, ExperimentConfig

logger = logging.getLogger(__name__)


def modality_subsets(tags=MODALITY_TAGS):
    """Every non-empty combination of modality tags, smallest first."""
    return [subset for size in range(1, len(tags) + 1) for subset in combinations(tags, size)]


def _cv_row(matrix, labels, spec, config):
    result = repeated_kfold(matrix, labels, spec, config.k_folds, config.repeats, config.seed,
                            config.feature_selection, config.target_sensitivity, config.workers)
    return result.row()


def modality_ablation(cohort, spec, subsets=None, config=None, dataset=None):
    """
    Repeated cross-validation restricted to the features of each modality subset.

    Args:
        cohort (list[PatientRecord]): patients
        spec (ModelSpec): supervised model
        subsets (list[tuple[str]], optional): modality tag subsets; every
            non-empty combination when omitted
        config (ExperimentConfig, optional): protocol parameters
        dataset (PatientDataset, optional): precomputed patient dataset

    Returns:
        pd.DataFrame: one row per subset
    """
    config = config if config is not None else ExperimentConfig()
    subsets = subsets if subsets is not None else modality_subsets()
    dataset = dataset if dataset is not None else patient_dataset(cohort, config.k_days, config.features)
    catalog = build_catalog(config.features)
    rows = []
    for subset in subsets:
        if not subset:
            raise DomainError("modality subset must not be empty")
        logger.info("Modality ablation: %s", "+".join(subset))
        row = {"modalities": "+".join(subset)}
        row.update(_cv_row(dataset.matrix.restrict_tags(subset, catalog), dataset.labels, spec, config))
        rows.append(row)
    return pd.DataFrame(rows)


def monitoring_length_ablation(cohort, spec, days=None, config=None):
    """Repeated cross-validation on the first k monitored days, one row per k."""
    config = config if config is not None else ExperimentConfig()
    days = days if days is not None else config.ablation_days
    catalog = build_catalog(config.features)
    rows = []
    for k in days:
        logger.info("Monitoring-length ablation: %d days", k)
        dataset = patient_dataset(cohort, k, config.features)
        matrix = dataset.matrix.restrict_tags(config.modalities, catalog)
        row = {"days": k}
        row.update(_cv_row(matrix, dataset.labels, spec, config))
        rows.append(row)
    return pd.DataFrame(rows)
