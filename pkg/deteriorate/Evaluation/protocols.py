"""
Evaluation protocols: repeated 95/5 anomaly splits for early warning and
repeated stratified k-fold cross-validation for risk prediction.

Repeats run in parallel with joblib; each repeat draws its seed from one
SeedSequence so results do not depend on the worker count.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.model_selection import KFold, StratifiedKFold

from deteriorate.errors import DomainError
from deteriorate.Evaluation.metrics import (
    MetricsReport,
    MetricsSummary,
    best_threshold_accuracy,
    confusion_metrics,
    fixed_sensitivity_operating_point,
    pr_auc,
    roc_auc,
    scored_metrics,
)
from deteriorate.Evaluation.selection import sequential_forward_selection
from deteriorate.Features.imputation import apply_imputation, fit_imputation_means
from deteriorate.Models.baseline import MajorityClassifier
from deteriorate.Models.lace import lace_classify, lace_score
from deteriorate.Models.registry import build_estimator
from deteriorate.Models.standardize import Standardizer

logger = logging.getLogger(__name__)

TRAIN_FRACTION = 0.95
MIN_NORMALS = 20


def repeat_seeds(seed, repeats):
    """One integer seed per repeat, independent of execution order."""
    children = np.random.SeedSequence(seed).spawn(repeats)
    return [int(child.generate_state(1)[0]) for child in children]


class FoldPreprocessor:
    """
    Imputation and standardization fitted on training examples only.

    Features never observed in the training examples are dropped.

    Attributes:
        columns (list[str]): features kept
        means (pd.Series): imputation means from the training examples
        standardizer (Standardizer): z-score from the imputed training examples
    """

    def __init__(self):
        self.columns = None
        self.means = None
        self.standardizer = None

    def fit(self, matrix):
        observed = ~matrix.mask.all(axis=0)
        dropped = [c for c in matrix.columns if not observed[c]]
        if dropped:
            logger.warning("Dropping %d feature(s) unobserved in the training examples: %s",
                           len(dropped), ", ".join(dropped))
        self.columns = [c for c in matrix.columns if observed[c]]
        if not self.columns:
            raise DomainError("no feature is observed in the training examples")
        train = matrix.select(self.columns)
        self.means = fit_imputation_means(train)
        self.standardizer = Standardizer().fit(apply_imputation(train, self.means).to_numpy())
        return self

    def transform(self, matrix):
        imputed = apply_imputation(matrix.select(self.columns), self.means)
        return self.standardizer.transform(imputed.to_numpy())

    def fit_transform(self, matrix):
        return self.fit(matrix).transform(matrix)


@dataclass(frozen=True)
class SplitPlan:
    train: np.ndarray
    test: np.ndarray
    seed: int


def fold_matrix(matrix, train):
    """Matrix whose co-occurrence columns are quantized over the training examples only."""
    return matrix.requantized(matrix.quantization_range(train))


def anomaly_split(labels, seed):
    """
    95/5 split of the normal examples; every anomaly goes to the test set.

    Raises:
        DomainError: no anomalies or fewer than 20 normal examples
    """
    labels = np.asarray(labels, dtype=int)
    normals = np.flatnonzero(labels == 0)
    anomalies = np.flatnonzero(labels == 1)
    if anomalies.size == 0:
        raise DomainError("anomaly evaluation needs at least one anomaly example")
    if normals.size < MIN_NORMALS:
        raise DomainError(f"anomaly evaluation needs at least {MIN_NORMALS} normal examples, "
                          f"got {normals.size}")
    n_train = int(np.floor(TRAIN_FRACTION * normals.size + 0.5))
    shuffled = np.random.default_rng(seed).permutation(normals)
    train = np.sort(shuffled[:n_train])
    test = np.sort(np.concatenate((shuffled[n_train:], anomalies)))
    return SplitPlan(train, test, seed)


def _anomaly_repeat(matrix, labels, spec, plan):
    preprocessor = FoldPreprocessor().fit(matrix.take(plan.train))
    model = build_estimator(spec).fit(preprocessor.transform(matrix.take(plan.train)))
    X_test = preprocessor.transform(matrix.take(plan.test))
    return scored_metrics(labels[plan.test], model.score(X_test), model.predict(X_test))


def repeat_anomaly_eval(dataset, spec, repeats=100, seed=0, workers=None):
    """
    Semi-supervised evaluation averaged over repeated anomaly splits.

    Args:
        dataset: object with ``matrix`` (FeatureMatrix) and ``labels``
        spec (ModelSpec): model trained on the normal training examples
        repeats (int): number of random splits
        seed (int): master seed
        workers (int, optional): joblib worker count, all cores when None

    Returns:
        MetricsSummary
    """
    labels = np.asarray(dataset.labels, dtype=int)
    plans = [anomaly_split(labels, s) for s in repeat_seeds(seed, repeats)]
    reports = Parallel(n_jobs=workers or -1)(
        delayed(_anomaly_repeat)(fold_matrix(dataset.matrix, plan.train), labels, spec, plan)
        for plan in plans)
    return MetricsSummary(reports)


def nu_sweep(dataset, spec, nus, repeats=100, seed=0, workers=None):
    """Early-warning metrics as nu varies, one row per nu."""
    rows = []
    for nu in nus:
        row = {"nu": nu}
        row.update(repeat_anomaly_eval(dataset, spec.with_params(nu=nu), repeats, seed, workers).row())
        rows.append(row)
    return pd.DataFrame(rows)


def fold_splitter(labels, k, seed):
    """Stratified folds, or plain folds with a warning when a class has fewer than k examples."""
    counts = np.bincount(np.asarray(labels, dtype=int), minlength=2)
    if counts.min() >= k:
        return StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    logger.warning("Only %d example(s) in the minority class for %d folds; using plain folds",
                   int(counts.min()), k)
    return KFold(n_splits=k, shuffle=True, random_state=seed)


@dataclass
class FoldOutcome:
    test: np.ndarray
    scores: np.ndarray
    predictions: np.ndarray
    selected: list
    train_accuracy: float


def _fit_fold(matrix, labels, train, test, spec, feature_selection):
    preprocessor = FoldPreprocessor().fit(matrix.take(train))
    X_train = preprocessor.transform(matrix.take(train))
    X_test = preprocessor.transform(matrix.take(test))
    y_train = labels[train]
    selected = list(preprocessor.columns)
    if feature_selection and spec.name != "majority":
        result = sequential_forward_selection(X_train, y_train, preprocessor.columns, spec)
        selected = result.selected
        keep = [preprocessor.columns.index(name) for name in selected]
        X_train, X_test = X_train[:, keep], X_test[:, keep]
    if not selected or (spec.name == "logreg" and np.unique(y_train).size < 2):
        model = MajorityClassifier().fit(X_train, y_train)
    else:
        model = build_estimator(spec).fit(X_train, y_train)
    train_accuracy = float(np.mean(model.predict(X_train) == y_train))
    return FoldOutcome(test, model.score(X_test), model.predict(X_test), selected, train_accuracy)


@dataclass
class RepeatOutcome:
    report: MetricsReport
    fixed: MetricsReport
    best_accuracy: float
    train_accuracy: float
    selected: list = field(default_factory=list)


def _repeat_folds(matrix, labels, k, seed):
    splitter = fold_splitter(labels, k, seed)
    return [(train, test, fold_matrix(matrix, train))
            for train, test in splitter.split(np.zeros(len(labels)), labels)]


def _kfold_repeat(folds, labels, spec, feature_selection, target_sensitivity):
    scores = np.zeros(len(labels))
    predictions = np.zeros(len(labels), dtype=int)
    selected, train_accuracy = [], []
    for train, test, matrix in folds:
        fold = _fit_fold(matrix, labels, train, test, spec, feature_selection)
        scores[test] = fold.scores
        predictions[test] = fold.predictions
        selected.extend(fold.selected)
        train_accuracy.append(fold.train_accuracy)
    report = scored_metrics(labels, scores, predictions)
    fixed = fixed_sensitivity_operating_point(scores, labels, target_sensitivity).report
    _, best_accuracy = best_threshold_accuracy(scores, labels)
    return RepeatOutcome(report, fixed, best_accuracy, float(np.mean(train_accuracy)), selected)


@dataclass
class CrossValidationResult:
    """
    Per-repeat outcomes of repeated k-fold cross-validation.

    ``summary`` averages the model's own predictions, ``fixed`` the
    predictions at the fixed-sensitivity threshold.
    """

    outcomes: list

    @property
    def summary(self):
        return MetricsSummary([o.report for o in self.outcomes])

    @property
    def fixed(self):
        return MetricsSummary([o.fixed for o in self.outcomes])

    @property
    def best_accuracy(self):
        return float(np.mean([o.best_accuracy for o in self.outcomes]))

    @property
    def train_accuracy(self):
        return float(np.mean([o.train_accuracy for o in self.outcomes]))

    def selection_counts(self):
        """How often each feature was selected across all folds and repeats."""
        return Counter(name for o in self.outcomes for name in o.selected)

    def row(self):
        row = self.fixed.row()
        row["best_threshold_accuracy"] = self.best_accuracy
        row["best_threshold_accuracy_std"] = float(np.std([o.best_accuracy for o in self.outcomes]))
        row["default_accuracy"] = float(self.summary.mean()["accuracy"])
        return row


def repeated_kfold(matrix, labels, spec, k=5, repeats=100, seed=0, feature_selection=True,
                   target_sensitivity=0.95, workers=None):
    """
    Repeated k-fold cross-validation with in-fold preprocessing and selection.

    The co-occurrence quantization range, imputation means, standardization
    and forward selection are fitted on the training folds only; every
    repeat reshuffles the folds.

    Args:
        matrix (FeatureMatrix): examples with missing entries still masked
        labels (np.ndarray): binary labels
        spec (ModelSpec): supervised model
        k (int): number of folds
        repeats (int): number of reshuffled repeats
        seed (int): master seed
        feature_selection (bool): run forward selection in each training fold
        target_sensitivity (float): sensitivity of the fixed operating point
        workers (int, optional): joblib worker count

    Returns:
        CrossValidationResult
    """
    labels = np.asarray(labels, dtype=int)
    if len(labels) < k:
        raise DomainError(f"{len(labels)} examples cannot fill {k} folds")
    if np.unique(labels).size < 2:
        raise DomainError("cross-validation needs both classes")
    outcomes = Parallel(n_jobs=workers or -1)(
        delayed(_kfold_repeat)(_repeat_folds(matrix, labels, k, s), labels, spec, feature_selection,
                                target_sensitivity)
        for s in repeat_seeds(seed, repeats))
    return CrossValidationResult(outcomes)


def knn_generalization(matrix, labels, spec, ks, k_folds=5, repeats=10, seed=0, workers=None):
    """Mean training and test accuracy of KNN for each K, without feature selection."""
    rows = []
    for K in ks:
        result = repeated_kfold(matrix, labels, spec.with_params(k=K), k_folds, repeats, seed,
                                feature_selection=False, workers=workers)
        rows.append({"k": K, "train_accuracy": result.train_accuracy,
                     "test_accuracy": float(result.summary.mean()["accuracy"])})
    return pd.DataFrame(rows)


def lace_baseline(dataset):
    """
    LACE index metrics of a patient dataset, no training involved.

    Returns:
        MetricsReport | None: None when any patient lacks LACE inputs
    """
    missing = [pid for pid, inputs in zip(dataset.patient_ids, dataset.lace_inputs) if inputs is None]
    if missing:
        logger.warning("LACE row omitted: no LACE inputs for %s", ", ".join(missing))
        return None
    scores = np.asarray([lace_score(inputs) for inputs in dataset.lace_inputs], dtype=float)
    predictions = np.asarray([lace_classify(score) for score in scores], dtype=int)
    labels = np.asarray(dataset.labels, dtype=int)
    report = confusion_metrics(labels, predictions)
    if np.unique(labels).size == 2:
        report = MetricsReport.from_counts(report.counts, roc_auc(labels, scores), pr_auc(labels, scores))
    return report
