"""
Neighbour-based models: K-nearest-neighbour classification and local
outlier factor scoring.
"""

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.neighbors import LocalOutlierFactor

from deteriorate.errors import DomainError
from deteriorate.Models.standardize import Standardizer

LOF_THRESHOLD = 1.5
# relative slack under which two distances count as equal
TIE_TOLERANCE = 1e-9


def _as_matrix(X, n_features=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if n_features is not None and X.shape[1] != n_features:
        raise DomainError(f"expected {n_features} features, got {X.shape[1]}")
    return X


class KnnModel:
    """
    Majority vote of the K nearest training examples (Euclidean).

    Every training example at the K-th smallest distance votes, so the
    neighbourhood can hold more than K examples and the vote does not depend
    on the order of the training rows. The score is the fraction of positive
    votes; a tied vote goes to the positive (deteriorated) class.
    """

    KIND = "knn"

    def __init__(self, k=2, standardize=True):
        if k < 1:
            raise DomainError("K must be at least 1")
        self.k = k
        self.standardize = standardize
        self.standardizer = None
        self.X = None
        self.y = None

    def fit(self, X, y):
        X = _as_matrix(X)
        y = np.asarray(y, dtype=int)
        if X.shape[0] == 0:
            raise DomainError("KNN needs at least one training example")
        if self.k > X.shape[0]:
            raise DomainError(f"K = {self.k} exceeds the {X.shape[0]} training examples")
        if self.standardize:
            self.standardizer = Standardizer()
            X = self.standardizer.fit_transform(X)
        self.X, self.y = X, y
        return self

    def score(self, X):
        """Positive-vote fraction per example."""
        X = _as_matrix(X, self.X.shape[1])
        if self.standardizer is not None:
            X = self.standardizer.transform(X)
        distances = cdist(X, self.X)
        kth = np.partition(distances, self.k - 1, axis=1)[:, self.k - 1:self.k]
        votes = distances <= kth * (1 + TIE_TOLERANCE) + TIE_TOLERANCE
        return (votes * self.y[np.newaxis, :]).sum(axis=1) / votes.sum(axis=1)

    def predict(self, X):
        return (self.score(X) >= 0.5).astype(int)

    def to_dict(self):
        return {"k": self.k, "standardize": self.standardize,
                "X": self.X.tolist(), "y": self.y.tolist(),
                "standardizer": self.standardizer.to_dict() if self.standardizer else None}

    @classmethod
    def from_dict(cls, data):
        model = cls(k=data["k"], standardize=False)
        model.fit(np.asarray(data["X"], dtype=float), np.asarray(data["y"], dtype=int))
        model.standardize = data["standardize"]
        if data.get("standardizer"):
            model.standardizer = Standardizer.from_dict(data["standardizer"])
        return model


def knn_predict(model, x):
    """Label and positive-vote fraction for one example."""
    fraction = float(model.score(x)[0])
    return {"label": int(fraction >= 0.5), "fraction": fraction}


class LofModel:
    """
    Local outlier factor of new examples against a training set. Scores are
    about 1 for inliers and well above 1 for outliers.
    """

    KIND = "lof"

    def __init__(self, k_neighbors=20, threshold=LOF_THRESHOLD, standardize=False):
        if k_neighbors < 1:
            raise DomainError("k_neighbors must be at least 1")
        self.k_neighbors = k_neighbors
        self.threshold = threshold
        self.standardize = standardize
        self.standardizer = None
        self.X = None
        self._lof = None

    def fit(self, X, y=None):
        X = _as_matrix(X)
        if X.shape[0] < 2:
            raise DomainError("LOF needs at least 2 training examples")
        if self.standardize:
            self.standardizer = Standardizer()
            X = self.standardizer.fit_transform(X)
        self.X = X
        neighbors = min(self.k_neighbors, X.shape[0] - 1)
        self._lof = LocalOutlierFactor(n_neighbors=neighbors, novelty=True).fit(X)
        return self

    def score(self, X):
        X = _as_matrix(X, self.X.shape[1])
        if self.standardizer is not None:
            X = self.standardizer.transform(X)
        return -self._lof.score_samples(X)

    def predict(self, X):
        return (self.score(X) > self.threshold).astype(int)

    def to_dict(self):
        return {"k_neighbors": self.k_neighbors, "threshold": self.threshold,
                "standardize": self.standardize, "X": self.X.tolist(),
                "standardizer": self.standardizer.to_dict() if self.standardizer else None}

    @classmethod
    def from_dict(cls, data):
        model = cls(data["k_neighbors"], data["threshold"], standardize=False)
        model.fit(np.asarray(data["X"], dtype=float))
        model.standardize = data["standardize"]
        if data.get("standardizer"):
            model.standardizer = Standardizer.from_dict(data["standardizer"])
        return model


def lof_score(X_train, x, k_neighbors=20):
    """LOF score(s) of ``x`` against a training set."""
    if k_neighbors >= len(X_train):
        raise DomainError("k_neighbors must be smaller than the training set")
    return LofModel(k_neighbors).fit(X_train).score(x)
