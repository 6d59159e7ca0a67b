"""
The two experiment suites as result tables.
"""

import logging

import pandas as pd

from deteriorate.errors import DomainError
from deteriorate.Evaluation.datasets import EarlyWarningBuilder, patient_dataset
from deteriorate.Evaluation.metrics import METRIC_NAMES
from deteriorate.Evaluation.protocols import lace_baseline, repeat_anomaly_eval, repeated_kfold
from deteriorate.Features.catalog import build_catalog
from deteriorate.Models.registry import spec_from_config
from deteriorate.settings import RISK_MODELS, ExperimentConfig

logger = logging.getLogger(__name__)


def early_warning_grid(cohort, config=None):
    """
    Repeated anomaly-split metrics for every (window, horizon, model) cell.

    Cells whose dataset cannot be split (no anomalies or too few normals)
    are reported with NaN metrics and a ``skipped`` reason.
    """
    config = config if config is not None else ExperimentConfig()
    builder = EarlyWarningBuilder(cohort, config.features)
    catalog = build_catalog(config.features)
    rows = []
    for window in config.windows:
        for horizon in config.horizons:
            dataset = builder.build(window, horizon, config.label_mode)
            dataset.matrix = dataset.matrix.restrict_tags(config.modalities, catalog)
            for name in config.models:
                row = {"window": window, "horizon": horizon, "model": name,
                       "normals": dataset.n_normals, "anomalies": dataset.n_anomalies}
                try:
                    summary = repeat_anomaly_eval(dataset, spec_from_config(name, config),
                                                  config.repeats, config.seed, config.workers)
                except DomainError as error:
                    logger.warning("w=%d h=%d %s skipped: %s", window, horizon, name, error)
                    row.update({metric: float("nan") for metric in METRIC_NAMES})
                    row["skipped"] = str(error)
                else:
                    row.update(summary.row())
                    row["skipped"] = ""
                rows.append(row)
    return pd.DataFrame(rows)


def risk_table(cohort, config=None, models=RISK_MODELS):
    """Repeated cross-validation rows for each supervised model plus the LACE row."""
    config = config if config is not None else ExperimentConfig()
    dataset = patient_dataset(cohort, config.k_days, config.features)
    matrix = dataset.matrix.restrict_tags(config.modalities, build_catalog(config.features))
    rows = []
    for name in models:
        logger.info("Risk prediction: %s", name)
        result = repeated_kfold(matrix, dataset.labels, spec_from_config(name, config),
                                config.k_folds, config.repeats, config.seed,
                                config.feature_selection, config.target_sensitivity, config.workers)
        row = {"model": name}
        row.update(result.row())
        rows.append(row)
    lace = lace_baseline(dataset)
    if lace is not None:
        row = {"model": "lace"}
        row.update(lace.to_dict())
        rows.append(row)
    return pd.DataFrame(rows)
