"""
Classification metrics, threshold sweeps and operating points.

Scores follow one convention throughout: higher means more likely
positive (deteriorated or anomalous), and an example is predicted positive
when its score is at least the threshold.
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
from sklearn.metrics import average_precision_score, roc_auc_score

from deteriorate.errors import DomainError

logger = logging.getLogger(__name__)

METRIC_NAMES = ("auc_roc", "auc_pr", "specificity", "sensitivity", "ppv", "accuracy")


def _ratio(numerator, denominator):
    return numerator / denominator if denominator else float("nan")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @classmethod
    def from_predictions(cls, labels, predictions):
        labels = np.asarray(labels, dtype=bool)
        predictions = np.asarray(predictions, dtype=bool)
        if labels.shape != predictions.shape:
            raise DomainError("labels and predictions differ in length")
        return cls(tp=int(np.sum(labels & predictions)), fp=int(np.sum(~labels & predictions)),
                   tn=int(np.sum(~labels & ~predictions)), fn=int(np.sum(labels & ~predictions)))

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """
    Ratio metrics derived from confusion counts, plus threshold-free AUCs.

    A ratio whose denominator is zero is NaN.
    """

    counts: ConfusionCounts
    sensitivity: float
    specificity: float
    ppv: float
    accuracy: float
    auc_roc: float = float("nan")
    auc_pr: float = float("nan")

    @classmethod
    def from_counts(cls, counts, auc_roc=float("nan"), auc_pr=float("nan")):
        return cls(
            counts=counts,
            sensitivity=_ratio(counts.tp, counts.tp + counts.fn),
            specificity=_ratio(counts.tn, counts.tn + counts.fp),
            ppv=_ratio(counts.tp, counts.tp + counts.fp),
            accuracy=_ratio(counts.tp + counts.tn, counts.total),
            auc_roc=auc_roc,
            auc_pr=auc_pr,
        )

    def recomputes(self):
        """True when the ratio metrics follow exactly from the stored counts."""
        fresh = MetricsReport.from_counts(self.counts, self.auc_roc, self.auc_pr)
        return all(np.array_equal(getattr(fresh, name), getattr(self, name), equal_nan=True)
                   for name in ("sensitivity", "specificity", "ppv", "accuracy"))

    def to_dict(self):
        data = {name: getattr(self, name) for name in METRIC_NAMES}
        data.update(asdict(self.counts))
        return data


def confusion_metrics(labels, predictions):
    return MetricsReport.from_counts(ConfusionCounts.from_predictions(labels, predictions))


def _check_both_classes(labels):
    labels = np.asarray(labels, dtype=int)
    if np.unique(labels).size < 2:
        raise DomainError("AUC is undefined when only one class is present")
    return labels


def roc_auc(labels, scores):
    """Trapezoidal area under the ROC curve."""
    return float(roc_auc_score(_check_both_classes(labels), np.asarray(scores, dtype=float)))


def pr_auc(labels, scores):
    """Area under the precision-recall curve by step summation over recall."""
    return float(average_precision_score(_check_both_classes(labels), np.asarray(scores, dtype=float)))


def scored_metrics(labels, scores, predictions):
    """MetricsReport from hard predictions, with AUCs when both classes are present."""
    counts = ConfusionCounts.from_predictions(labels, predictions)
    if np.unique(np.asarray(labels, dtype=int)).size < 2:
        return MetricsReport.from_counts(counts)
    return MetricsReport.from_counts(counts, roc_auc(labels, scores), pr_auc(labels, scores))


def threshold_sweep(scores, labels):
    """
    Metrics at every distinct score used as a threshold, plus +inf.

    Returns:
        pd.DataFrame: one row per threshold in decreasing order with columns
        threshold, tp, fp, tn, fn, sensitivity, specificity, ppv, accuracy
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    thresholds = np.concatenate(([np.inf], np.unique(scores)[::-1]))
    rows = []
    for threshold in thresholds:
        report = confusion_metrics(labels, scores >= threshold)
        row = {"threshold": threshold}
        row.update(asdict(report.counts))
        row.update(sensitivity=report.sensitivity, specificity=report.specificity,
                   ppv=report.ppv, accuracy=report.accuracy)
        rows.append(row)
    return pd.DataFrame(rows)


@dataclass(frozen=True)
class OperatingPoint:
    """
    Threshold chosen for a sensitivity target.

    ``reached`` is False when score ties make the achieved sensitivity jump
    past the target by more than one positive example.
    """

    threshold: float
    report: MetricsReport
    target: float
    reached: bool


def fixed_sensitivity_operating_point(scores, labels, target=0.95):
    """
    Highest threshold whose sensitivity is at least ``target``.

    Among thresholds meeting the target the highest one gives the best
    specificity; target 0 selects +inf (no positive predictions).

    Raises:
        DomainError: no positive labels, or target outside [0, 1]
    """
    if not 0 <= target <= 1:
        raise DomainError("target sensitivity must lie in [0, 1]")
    labels = np.asarray(labels, dtype=bool)
    positives = int(labels.sum())
    if positives == 0:
        raise DomainError("no positive examples to fix the sensitivity on")
    sweep = threshold_sweep(scores, labels)
    # Sensitivity is non-decreasing down the sweep; the last row predicts everything positive
    meeting = sweep.index[sweep["sensitivity"] >= target - 1e-12]
    row = sweep.loc[meeting[0]]
    threshold = float(row["threshold"])
    report = confusion_metrics(labels, np.asarray(scores, dtype=float) >= threshold)
    if np.unique(labels).size == 2:
        report = MetricsReport.from_counts(report.counts, roc_auc(labels, scores), pr_auc(labels, scores))
    reached = report.sensitivity - target <= 1.0 / positives + 1e-12
    if not reached:
        logger.warning("sensitivity target %.3f unreachable through score ties; closest is %.3f",
                       target, report.sensitivity)
    return OperatingPoint(threshold, report, target, bool(reached))


def best_threshold_accuracy(scores, labels):
    """(threshold, accuracy) maximizing accuracy; ties keep the highest threshold."""
    sweep = threshold_sweep(scores, labels)
    best = sweep["accuracy"].idxmax()
    return float(sweep.loc[best, "threshold"]), float(sweep.loc[best, "accuracy"])


def find_matching_counts(sensitivity, specificity, ppv, decimals=4, max_class_size=2000):
    """
    Smallest confusion counts whose sensitivity, specificity and PPV round
    to the given values.

    Returns:
        ConfusionCounts | None: None when nothing matches within the size cap
    """
    def pairs(target):
        size = np.arange(1, max_class_size + 1)
        hits = np.rint(target * size).astype(int)
        keep = np.round(hits / size, decimals) == round(target, decimals)
        return list(zip(size[keep], hits[keep]))

    best = None
    for positives, tp in pairs(sensitivity):
        for negatives, tn in pairs(specificity):
            fp = negatives - tn
            if tp + fp == 0 or round(tp / (tp + fp), decimals) != round(ppv, decimals):
                continue
            key = (positives + negatives, positives)
            if best is None or key < best[0]:
                best = (key, ConfusionCounts(int(tp), int(fp), int(tn), int(positives - tp)))
    return None if best is None else best[1]


class MetricsSummary:
    """
    Mean and per-repeat standard deviation of a list of MetricsReports.

    Repeats are averaged metric by metric, not by pooling counts.
    """

    def __init__(self, reports):
        if not reports:
            raise DomainError("no metrics to summarize")
        self.reports = list(reports)
        self.table = pd.DataFrame([{name: getattr(r, name) for name in METRIC_NAMES}
                                   for r in self.reports])

    def mean(self):
        return self.table.mean()

    def std(self):
        return self.table.std(ddof=1) if len(self.table) > 1 else self.table.std(ddof=0)

    def row(self):
        """Flat mapping with ``<metric>`` and ``<metric>_std`` columns."""
        mean, std = self.mean(), self.std()
        data = {}
        for name in METRIC_NAMES:
            data[name] = float(mean[name])
            data[f"{name}_std"] = float(std[name])
        data["repeats"] = len(self.reports)
        return data
