"""
Sequential forward feature selection with leave-one-out accuracy.

Starting from the empty set, the candidate that most improves the
leave-one-out accuracy on the training examples is added; selection stops
when no candidate strictly improves it. Equal accuracies go to the
lexicographically smallest feature name.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from deteriorate.errors import DomainError
from deteriorate.Models.neighbors import TIE_TOLERANCE
from deteriorate.Models.registry import ModelSpec, build_estimator

logger = logging.getLogger(__name__)


@dataclass
class SfsResult:
    """
    Attributes:
        selected (list[str]): features in order of acceptance
        accuracy_trace (list[float]): leave-one-out accuracy after each acceptance
        baseline_accuracy (float): leave-one-out accuracy of the majority vote
    """

    selected: list = field(default_factory=list)
    accuracy_trace: list = field(default_factory=list)
    baseline_accuracy: float = float("nan")

    @property
    def subset(self):
        return sorted(self.selected)

    @property
    def accuracy(self):
        return self.accuracy_trace[-1] if self.accuracy_trace else self.baseline_accuracy


def majority_loo_accuracy(y):
    """Leave-one-out accuracy of predicting the majority label (ties positive)."""
    y = np.asarray(y, dtype=int)
    positives = y.sum()
    rest_positive = positives - y
    rest_negative = (len(y) - positives) - (1 - y)
    predictions = (rest_positive >= rest_negative).astype(int)
    return float(np.mean(predictions == y))


class _KnnLoo:
    """Leave-one-out KNN accuracy over growing feature subsets."""

    def __init__(self, X, y, k):
        if k > X.shape[0] - 1:
            raise DomainError(f"K = {k} needs at least {k + 1} training examples")
        self.y = np.asarray(y, dtype=int)
        self.k = k
        # (features, n, n) squared coordinate differences
        self.squared = (X.T[:, :, np.newaxis] - X.T[:, np.newaxis, :]) ** 2
        self.base = np.zeros((X.shape[0], X.shape[0]))

    def accuracy(self, extra):
        distances = self.base + self.squared[extra]
        np.fill_diagonal(distances, np.inf)
        # squared distances; every example at the K-th smallest one votes
        kth = np.partition(distances, self.k - 1, axis=1)[:, self.k - 1:self.k]
        limit = kth * (1 + TIE_TOLERANCE) ** 2 + TIE_TOLERANCE ** 2
        votes = distances <= limit
        fraction = (votes * self.y[np.newaxis, :]).sum(axis=1) / votes.sum(axis=1)
        return float(np.mean((fraction >= 0.5).astype(int) == self.y))

    def accept(self, feature):
        self.base = self.base + self.squared[feature]


def _generic_loo_accuracy(X, y, spec):
    hits = 0
    for held_out in range(len(y)):
        train = np.arange(len(y)) != held_out
        if np.unique(y[train]).size < 2 and spec.name == "logreg":
            prediction = int(y[train][0])
        else:
            model = build_estimator(spec).fit(X[train], y[train])
            prediction = int(model.predict(X[held_out:held_out + 1])[0])
        hits += prediction == y[held_out]
    return hits / len(y)


def sequential_forward_selection(X, y, feature_names, spec=None, max_features=None):
    """
    Greedy forward selection maximizing leave-one-out accuracy.

    Args:
        X (np.ndarray): imputed, standardized training matrix
        y (np.ndarray): binary labels
        feature_names (list[str]): column names of X
        spec (ModelSpec, optional): model evaluated on each subset; KNN
            with K = 2 by default
        max_features (int, optional): stop after this many acceptances

    Returns:
        SfsResult
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    names = list(feature_names)
    if not names:
        raise DomainError("feature selection needs at least one candidate feature")
    if X.shape[1] != len(names):
        raise DomainError("feature names do not match the matrix columns")
    spec = spec if spec is not None else ModelSpec("knn", {"k": 2, "standardize": False})
    limit = max_features if max_features is not None else len(names)

    # Candidates are scanned in name order so the first maximum wins ties
    order = sorted(range(len(names)), key=lambda i: names[i])
    fast = _KnnLoo(X, y, spec.params.get("k", 2)) if spec.name == "knn" else None
    result = SfsResult(baseline_accuracy=majority_loo_accuracy(y))
    chosen = []
    current = result.baseline_accuracy
    while len(chosen) < limit:
        best, best_accuracy = None, current
        for column in order:
            if column in chosen:
                continue
            if fast is not None:
                accuracy = fast.accuracy(column)
            else:
                accuracy = _generic_loo_accuracy(X[:, chosen + [column]], y, spec)
            if accuracy > best_accuracy:
                best, best_accuracy = column, accuracy
        if best is None:
            break
        chosen.append(best)
        if fast is not None:
            fast.accept(best)
        current = best_accuracy
        result.selected.append(names[best])
        result.accuracy_trace.append(best_accuracy)
        logger.debug("SFS accepted %s (LOO accuracy %.4f)", names[best], best_accuracy)
    return result
