"""
Mean imputation of missing features.

Means are fitted on one set of examples (the training fold in
cross-validation) and applied to any other; observed entries are never
changed and the missing-mask is kept for provenance.
"""

import logging

from deteriorate.errors import DomainError
from deteriorate.Features.assembly import FeatureMatrix

logger = logging.getLogger(__name__)


def fit_imputation_means(matrix):
    """
    Per-feature mean over the examples where the feature is observed.

    Raises:
        DomainError: a feature is missing in every example
    """
    observed = matrix.values.mask(matrix.mask)
    means = observed.mean()
    unobserved = list(means.index[means.isna()])
    if unobserved:
        raise DomainError(f"feature(s) missing in every example: {', '.join(unobserved)}")
    return means


def apply_imputation(matrix, means):
    """Replace masked entries with the given means."""
    values = matrix.values.mask(matrix.mask).fillna(means)
    return FeatureMatrix(values, matrix.mask.copy())


def impute_missing(matrix):
    """Mean-impute a matrix from its own observed entries."""
    imputed = apply_imputation(matrix, fit_imputation_means(matrix))
    logger.debug("imputed %d missing entries", int(matrix.mask.to_numpy().sum()))
    return imputed
