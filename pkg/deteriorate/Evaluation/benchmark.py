"""
Synthetic early-warning benchmark with contaminated training data.

Normal examples are standard Gaussian; anomalies are shifted along every
axis. A small share of the examples labelled normal are drawn from the
anomaly distribution, so semi-supervised models see outliers in their
training data.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd

from deteriorate.errors import DomainError
from deteriorate.Features.assembly import FeatureMatrix

N_NORMALS = 400
N_ANOMALIES = 40
N_FEATURES = 8
CONTAMINATION = 0.035
ANOMALY_SHIFT = 1.5


@dataclass
class BenchmarkDataset:
    matrix: FeatureMatrix
    labels: np.ndarray
    contaminated: np.ndarray


def synthetic_anomaly_benchmark(seed=0, n_normals=N_NORMALS, n_anomalies=N_ANOMALIES,
                                n_features=N_FEATURES, contamination=CONTAMINATION,
                                shift=ANOMALY_SHIFT):
    """
    Args:
        seed (int): generator seed
        n_normals (int): examples labelled normal, contaminated ones included
        n_anomalies (int): examples labelled anomalous
        n_features (int): dimension
        contamination (float): share of the normal-labelled examples drawn
            from the anomaly distribution
        shift (float): anomaly mean on every axis

    Returns:
        BenchmarkDataset
    """
    if not 0 <= contamination < 1:
        raise DomainError("contamination must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    normals = rng.standard_normal((n_normals, n_features))
    n_contaminated = int(round(contamination * n_normals))
    contaminated = np.zeros(n_normals + n_anomalies, dtype=bool)
    dirty = rng.choice(n_normals, size=n_contaminated, replace=False)
    normals[dirty] += shift
    contaminated[dirty] = True
    anomalies = rng.standard_normal((n_anomalies, n_features)) + shift
    values = pd.DataFrame(np.vstack((normals, anomalies)),
                          columns=[f"x{i}" for i in range(n_features)])
    values.index = pd.Index([f"b{i:04d}" for i in range(len(values))], name="example_id")
    labels = np.concatenate((np.zeros(n_normals, dtype=int), np.ones(n_anomalies, dtype=int)))
    return BenchmarkDataset(FeatureMatrix(values), labels, contaminated)
