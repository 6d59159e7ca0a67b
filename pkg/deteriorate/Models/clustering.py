"""K-means anomaly scoring: distance to the nearest centroid."""

import numpy as np
from sklearn.cluster import KMeans

from deteriorate.errors import DomainError
from deteriorate.Models.standardize import Standardizer

N_INIT = 10
THRESHOLD_QUANTILE = 0.95


class KMeansModel:
    """
    K-means fitted on normal examples. Examples farther from every centroid
    than the 95th percentile of training distances are anomalies.
    """

    KIND = "kmeans"

    def __init__(self, k_clusters=2, seed=0, standardize=False):
        if k_clusters < 1:
            raise DomainError("k_clusters must be at least 1")
        self.k_clusters = k_clusters
        self.seed = seed
        self.standardize = standardize
        self.standardizer = None
        self.centroids = None
        self.threshold = None

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=float)
        if self.k_clusters > X.shape[0]:
            raise DomainError(f"{self.k_clusters} clusters for {X.shape[0]} examples")
        if self.standardize:
            self.standardizer = Standardizer()
            X = self.standardizer.fit_transform(X)
        kmeans = KMeans(n_clusters=self.k_clusters, n_init=N_INIT, random_state=self.seed).fit(X)
        self.centroids = kmeans.cluster_centers_
        self.threshold = float(np.quantile(self._distances(X), THRESHOLD_QUANTILE))
        return self

    def _distances(self, X):
        gaps = X[:, np.newaxis, :] - self.centroids[np.newaxis, :, :]
        return np.sqrt((gaps ** 2).sum(axis=2)).min(axis=1)

    def score(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[np.newaxis, :]
        if X.shape[1] != self.centroids.shape[1]:
            raise DomainError(f"expected {self.centroids.shape[1]} features, got {X.shape[1]}")
        if self.standardizer is not None:
            X = self.standardizer.transform(X)
        return self._distances(X)

    def predict(self, X):
        return (self.score(X) > self.threshold).astype(int)

    def to_dict(self):
        return {"k_clusters": self.k_clusters, "seed": self.seed, "standardize": self.standardize,
                "centroids": self.centroids.tolist(), "threshold": self.threshold,
                "standardizer": self.standardizer.to_dict() if self.standardizer else None}

    @classmethod
    def from_dict(cls, data):
        model = cls(data["k_clusters"], data["seed"], data["standardize"])
        model.centroids = np.asarray(data["centroids"], dtype=float)
        model.threshold = data["threshold"]
        if data.get("standardizer"):
            model.standardizer = Standardizer.from_dict(data["standardizer"])
        return model


def kmeans_anomaly_score(X_train, x, k_clusters=2, seed=0):
    """Distance of ``x`` to the nearest centroid of K-means fitted on X_train."""
    return KMeansModel(k_clusters, seed).fit(X_train).score(x)
