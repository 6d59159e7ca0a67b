"""Z-score standardization with training statistics."""

import numpy as np
from sklearn.preprocessing import StandardScaler

from deteriorate.errors import DomainError


class Standardizer:
    """
    Column-wise z-score over scikit-learn's ``StandardScaler``. Zero-variance
    columns keep unit scale, so they map to 0 instead of dividing by zero.

    Attributes:
        scaler (StandardScaler): fitted scaler, None before ``fit``
    """

    def __init__(self):
        self.scaler = None

    @property
    def mean(self):
        return self.scaler.mean_

    @property
    def scale(self):
        return self.scaler.scale_

    def fit(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise DomainError("Standardizer needs a non-empty 2-D matrix")
        self.scaler = StandardScaler().fit(X)
        return self

    def transform(self, X):
        if self.scaler is None:
            raise DomainError("Standardizer is not fitted")
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[np.newaxis, :]
        if X.shape[1] != self.scaler.n_features_in_:
            raise DomainError(f"expected {self.scaler.n_features_in_} features, got {X.shape[1]}")
        return self.scaler.transform(X)

    def fit_transform(self, X):
        return self.fit(X).transform(X)

    def to_dict(self):
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, data):
        mean = np.asarray(data["mean"], dtype=float)
        scale = np.asarray(data["scale"], dtype=float)
        scaler = StandardScaler()
        scaler.mean_, scaler.scale_, scaler.var_ = mean, scale, scale ** 2
        scaler.n_features_in_ = mean.size
        scaler.n_samples_seen_ = 0
        standardizer = cls()
        standardizer.scaler = scaler
        return standardizer
