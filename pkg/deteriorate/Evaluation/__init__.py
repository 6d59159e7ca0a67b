"""Evaluation module initialization"""
from .metrics import (
    ConfusionCounts,
    MetricsReport,
    MetricsSummary,
    OperatingPoint,
    best_threshold_accuracy,
    confusion_metrics,
    find_matching_counts,
    fixed_sensitivity_operating_point,
    pr_auc,
    roc_auc,
    threshold_sweep,
)
from .datasets import (
    EarlyWarningBuilder,
    EarlyWarningDataset,
    PatientDataset,
    build_early_warning_dataset,
    patient_dataset,
)
from .selection import SfsResult, sequential_forward_selection
from .protocols import (
    FoldPreprocessor,
    SplitPlan,
    anomaly_split,
    fold_matrix,
    knn_generalization,
    lace_baseline,
    nu_sweep,
    repeat_anomaly_eval,
    repeated_kfold,
)
from .ablations import modality_ablation, monitoring_length_ablation
from .benchmark import synthetic_anomaly_benchmark
from .experiments import early_warning_grid, risk_table

__all__ = [
    'ConfusionCounts', 'MetricsReport', 'MetricsSummary', 'OperatingPoint',
    'best_threshold_accuracy', 'confusion_metrics', 'find_matching_counts',
    'fixed_sensitivity_operating_point', 'pr_auc', 'roc_auc', 'threshold_sweep',
    'EarlyWarningBuilder', 'EarlyWarningDataset', 'PatientDataset',
    'build_early_warning_dataset', 'patient_dataset', 'SfsResult',
    'sequential_forward_selection', 'FoldPreprocessor', 'SplitPlan', 'anomaly_split', 'fold_matrix',
    'knn_generalization', 'lace_baseline', 'nu_sweep', 'repeat_anomaly_eval', 'repeated_kfold',
    'modality_ablation', 'monitoring_length_ablation', 'synthetic_anomaly_benchmark',
    'early_warning_grid', 'risk_table',
]
