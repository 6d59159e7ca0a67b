"""Majority-class baseline."""

import numpy as np

from deteriorate.errors import DomainError


class MajorityClassifier:
    """Predicts the most frequent training label for every example (ties go positive)."""

    KIND = "majority"

    def __init__(self):
        self.positive_rate = None

    def fit(self, X, y):
        y = np.asarray(y, dtype=int)
        if y.size == 0:
            raise DomainError("majority baseline needs labels")
        self.positive_rate = float(y.mean())
        return self

    def score(self, X):
        return np.full(len(X), self.positive_rate)

    def predict(self, X):
        return np.full(len(X), int(self.positive_rate >= 0.5))

    def to_dict(self):
        return {"positive_rate": self.positive_rate}

    @classmethod
    def from_dict(cls, data):
        model = cls()
        model.positive_rate = data["positive_rate"]
        return model
