import math
from datetime import date, timedelta

import numpy as np
import pandas as pd
import pytest

from deteriorate.errors import DomainError
from deteriorate.Evaluation import (
    ConfusionCounts,
    EarlyWarningBuilder,
    FoldPreprocessor,
    MetricsReport,
    MetricsSummary,
    PatientDataset,
    anomaly_split,
    best_threshold_accuracy,
    build_early_warning_dataset,
    confusion_metrics,
    early_warning_grid,
    find_matching_counts,
    fixed_sensitivity_operating_point,
    fold_matrix,
    knn_generalization,
    lace_baseline,
    modality_ablation,
    monitoring_length_ablation,
    nu_sweep,
    patient_dataset,
    pr_auc,
    repeat_anomaly_eval,
    repeated_kfold,
    risk_table,
    roc_auc,
    sequential_forward_selection,
    synthetic_anomaly_benchmark,
    threshold_sweep,
)
from deteriorate.Evaluation.ablations import modality_subsets
from deteriorate.Evaluation.datasets import window_label
from deteriorate.Evaluation.protocols import repeat_seeds
from deteriorate.Evaluation.selection import majority_loo_accuracy
from deteriorate.Features import TEXTURE_FEATURES, FeatureMatrix
from deteriorate.Ingest.synthetic import generate_synthetic_cohort
from deteriorate.Models import LaceInputs, ModelSpec, spec_from_config
from deteriorate.settings import ExperimentConfig, SynthConfig

DAY0 = date(2017, 1, 2)


def _matrix(values, columns=None):
    values = np.asarray(values, dtype=float)
    columns = columns or [f"f{i}" for i in range(values.shape[1])]
    index = pd.Index([f"e{i:03d}" for i in range(values.shape[0])], name="example_id")
    return FeatureMatrix(pd.DataFrame(values, columns=columns, index=index))


@pytest.fixture
def tiny_config():
    return ExperimentConfig(repeats=1, k_folds=2, k_days=7, workers=1, feature_selection=False,
                            windows=(1,), horizons=(1,), models=("kmeans", "ocsvm"))


# Metrics

def test_confusion_metrics_formulas():
    report = confusion_metrics([1, 1, 0, 0, 0, 0], [1, 1, 1, 0, 0, 0])
    assert report.counts == ConfusionCounts(tp=2, fp=1, tn=3, fn=0)
    assert report.sensitivity == 1.0
    assert report.specificity == pytest.approx(0.75)
    assert report.ppv == pytest.approx(2 / 3)
    assert report.accuracy == pytest.approx(5 / 6)
    assert report.recomputes()


def test_zero_denominator_is_nan():
    report = confusion_metrics([0, 0], [0, 0])
    assert math.isnan(report.sensitivity) and math.isnan(report.ppv)
    assert report.specificity == 1.0


def test_perfect_ranking_aucs():
    labels, scores = [0, 0, 0, 1, 1], [0.1, 0.2, 0.3, 0.8, 0.9]
    assert roc_auc(labels, scores) == pytest.approx(1.0)
    assert pr_auc(labels, scores) == pytest.approx(1.0)
    assert roc_auc(labels, [-s for s in scores]) == pytest.approx(0.0)


def test_auc_needs_both_classes():
    with pytest.raises(DomainError):
        roc_auc([1, 1, 1], [0.1, 0.2, 0.3])
    with pytest.raises(DomainError):
        pr_auc([0, 0], [0.1, 0.2])


def test_threshold_sweep_starts_above_all_scores():
    sweep = threshold_sweep([0.2, 0.5, 0.5], [0, 1, 1])
    assert sweep["threshold"].tolist() == [np.inf, 0.5, 0.2]
    assert sweep["tp"].tolist() == [0, 2, 2]
    assert sweep["fp"].tolist() == [0, 0, 1]


def test_fixed_sensitivity_zero_target_predicts_nothing():
    point = fixed_sensitivity_operating_point([0.1, 0.2, 0.3, 0.8, 0.9], [0, 0, 0, 1, 1], 0.0)
    assert point.threshold == np.inf
    assert point.report.sensitivity == 0.0
    assert point.reached


def test_fixed_sensitivity_on_separated_scores():
    point = fixed_sensitivity_operating_point([0.1, 0.2, 0.3, 0.8, 0.9], [0, 0, 0, 1, 1], 0.95)
    assert point.threshold == pytest.approx(0.8)
    assert point.report.sensitivity == 1.0
    assert point.report.specificity == 1.0
    assert point.report.auc_roc == pytest.approx(1.0)


def test_fixed_sensitivity_reports_unreachable_target():
    point = fixed_sensitivity_operating_point([0.5] * 4 + [0.1], [1, 1, 1, 1, 0], 0.25)
    assert point.report.sensitivity == 1.0
    assert not point.reached
    with pytest.raises(DomainError):
        fixed_sensitivity_operating_point([0.1, 0.2], [0, 0])
    with pytest.raises(DomainError):
        fixed_sensitivity_operating_point([0.1, 0.2], [0, 1], 1.5)


def test_best_threshold_accuracy_keeps_highest_threshold_on_ties():
    threshold, accuracy = best_threshold_accuracy([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    assert (threshold, accuracy) == (pytest.approx(0.8), pytest.approx(0.75))


def test_find_matching_counts_recovers_smallest_table():
    counts = find_matching_counts(1.0, 0.75, 2 / 3)
    assert counts == ConfusionCounts(tp=2, fp=1, tn=3, fn=0)
    report = MetricsReport.from_counts(counts)
    assert report.recomputes()
    assert round(report.ppv, 4) == round(2 / 3, 4)


def test_find_matching_counts_none_within_cap():
    assert find_matching_counts(0.5, 0.5, 0.1234, max_class_size=4) is None


def test_metrics_summary_uses_sample_std():
    reports = [confusion_metrics([1, 0], [1, 0]), confusion_metrics([1, 0], [0, 0])]
    row = MetricsSummary(reports).row()
    assert row["accuracy"] == pytest.approx(0.75)
    assert row["accuracy_std"] == pytest.approx(np.std([1.0, 0.5], ddof=1))
    assert row["repeats"] == 2
    with pytest.raises(DomainError):
        MetricsSummary([])


# Datasets

def _day(i):
    return DAY0 + timedelta(days=i)


def test_window_labels():
    events = (_day(10),)
    assert window_label(_day(9), 1, events) == 1
    assert window_label(_day(8), 1, events) == 0
    assert window_label(_day(8), 2, events) == 1
    assert window_label(_day(8), 3, events, "within") == 1
    assert window_label(_day(10), 3, events, "within") == 0
    with pytest.raises(DomainError):
        window_label(_day(8), 1, events, "later")


def test_early_warning_dataset(small_cohort):
    builder = EarlyWarningBuilder(small_cohort)
    dataset = builder.build(2, 1)
    by_id = {record.patient_id: record for record in small_cohort}
    assert len(dataset) == len(dataset.matrix) == len(dataset.window_ends)
    assert dataset.matrix.values.shape[1] == 51
    for pid, end, label in zip(dataset.patient_ids, dataset.window_ends, dataset.labels):
        record = by_id[pid]
        assert end + timedelta(days=1) <= record.monitoring_end
        assert end - timedelta(days=1) >= record.monitoring_start
        assert label == window_label(end, 1, record.outcome.deterioration_dates)
    assert dataset.n_anomalies > 0
    assert builder.build(2, 3).n_normals + builder.build(2, 3).n_anomalies < len(dataset)


def test_build_early_warning_dataset_within_mode(small_cohort):
    exact = build_early_warning_dataset(small_cohort, 1, 3)
    within = build_early_warning_dataset(small_cohort, 1, 3, label_mode="within")
    assert within.window_ends == exact.window_ends
    assert within.n_anomalies >= exact.n_anomalies
    assert not np.any(exact.labels > within.labels)


def test_patient_dataset_labels(small_cohort):
    dataset = patient_dataset(small_cohort, k_days=5)
    assert dataset.labels.tolist() == [int(r.outcome.deteriorated) for r in small_cohort]
    assert dataset.patient_ids == tuple(r.patient_id for r in small_cohort)
    with pytest.raises(DomainError):
        patient_dataset([], k_days=5)


# Protocols

def test_anomaly_split_sizes():
    labels = np.array([0] * 100 + [1] * 5)
    plan = anomaly_split(labels, seed=1)
    assert plan.train.size == 95
    assert plan.test.size == 10
    assert not set(plan.train) & set(plan.test)
    assert np.all(labels[plan.train] == 0)
    assert set(np.flatnonzero(labels)) <= set(plan.test)
    np.testing.assert_array_equal(anomaly_split(labels, seed=1).train, plan.train)


def test_anomaly_split_preconditions():
    with pytest.raises(DomainError):
        anomaly_split(np.zeros(50, dtype=int), 0)
    with pytest.raises(DomainError):
        anomaly_split(np.array([0] * 19 + [1]), 0)


def test_repeat_seeds_are_stable():
    assert repeat_seeds(3, 5) == repeat_seeds(3, 5)
    assert repeat_seeds(3, 5)[:2] == repeat_seeds(3, 2)
    assert len(set(repeat_seeds(3, 5))) == 5


def test_fold_preprocessor_fits_on_training_rows_only():
    train = _matrix([[1.0, np.nan], [3.0, np.nan]], ["a", "b"])
    test = _matrix([[np.nan, 7.0], [100.0, 8.0]], ["a", "b"])
    preprocessor = FoldPreprocessor().fit(train)
    assert preprocessor.columns == ["a"]
    np.testing.assert_allclose(preprocessor.transform(test), [[0.0], [98.0]])


def _hr_cohort(record_factory, series_factory, held_out_scale):
    rng = np.random.default_rng(4)
    offsets = np.arange(2 * 1440)
    cohort = []
    for i in range(4):
        values = np.round(75 + 8 * np.sin(offsets / (30 + 7 * i)) + rng.normal(0, 3, offsets.size))
        if i == 3:
            values = values * held_out_scale
        cohort.append(record_factory(f"T00{i}", n_days=2,
                                     heart_rate=series_factory("heart_rate", offsets, values)))
    return cohort


def test_cooccurrence_range_comes_from_training_rows(record_factory, series_factory):
    plain = patient_dataset(_hr_cohort(record_factory, series_factory, 1.0), k_days=2)
    extreme = patient_dataset(_hr_cohort(record_factory, series_factory, 2.5), k_days=2)
    train, texture = np.arange(3), list(TEXTURE_FEATURES)
    # the whole-cohort quantization lets the held-out patient move the training rows
    assert not np.allclose(plain.matrix.values.iloc[train]["hr_energy"],
                           extreme.matrix.values.iloc[train]["hr_energy"])
    assert plain.matrix.quantization_range(train) == extreme.matrix.quantization_range(train)
    pd.testing.assert_frame_equal(fold_matrix(plain.matrix, train).values.iloc[train][texture],
                                  fold_matrix(extreme.matrix, train).values.iloc[train][texture])
    folded = fold_matrix(extreme.matrix, train)
    assert folded.texture is None
    assert folded.quantization_range(train) is None
    assert np.isfinite(folded.values["hr_energy"]).all()


def test_fold_matrix_leaves_matrices_without_texture_alone():
    matrix = _matrix([[1.0, 2.0], [3.0, 4.0]], ["hr_energy", "b"])
    pd.testing.assert_frame_equal(fold_matrix(matrix, [0]).values, matrix.values)


def test_majority_repeated_kfold_accuracy():
    rng = np.random.default_rng(0)
    labels = np.array([1] * 7 + [0] * 18)
    matrix = _matrix(rng.standard_normal((25, 4)))
    result = repeated_kfold(matrix, labels, ModelSpec("majority"), k=5, repeats=4, seed=0,
                            workers=1)
    assert result.summary.mean()["accuracy"] == pytest.approx(0.72)
    assert result.summary.std()["accuracy"] == pytest.approx(0.0)


def test_repeated_kfold_is_reproducible():
    rng = np.random.default_rng(1)
    labels = np.array([1] * 8 + [0] * 12)
    values = rng.standard_normal((20, 3))
    values[:, 0] += 2.0 * labels
    matrix = _matrix(values)
    spec = ModelSpec("knn", {"k": 3, "standardize": False})
    first = repeated_kfold(matrix, labels, spec, k=4, repeats=3, seed=5, workers=1)
    second = repeated_kfold(matrix, labels, spec, k=4, repeats=3, seed=5, workers=2)
    pd.testing.assert_frame_equal(first.summary.table, second.summary.table)
    assert first.selection_counts()["f0"] > 0
    assert {"auc_roc", "auc_roc_std", "best_threshold_accuracy", "default_accuracy"} <= set(first.row())


def test_repeated_kfold_preconditions():
    matrix = _matrix(np.zeros((4, 2)))
    with pytest.raises(DomainError):
        repeated_kfold(matrix, [0, 1, 0, 1], ModelSpec("majority"), k=5)
    with pytest.raises(DomainError):
        repeated_kfold(matrix, [0, 0, 0, 0], ModelSpec("majority"), k=2)


def test_knn_generalization_rows():
    rng = np.random.default_rng(2)
    labels = np.array([1] * 10 + [0] * 10)
    values = rng.standard_normal((20, 2)) + 3.0 * labels[:, np.newaxis]
    table = knn_generalization(_matrix(values), labels, ModelSpec("knn", {"standardize": False}),
                               ks=(1, 3), repeats=2, workers=1)
    assert table["k"].tolist() == [1, 3]
    assert table.loc[0, "train_accuracy"] == pytest.approx(1.0)
    assert (table["test_accuracy"] > 0.8).all()


def test_lace_baseline():
    labels = np.array([1, 0, 0])
    lace = (LaceInputs(14, True, 4, 9), LaceInputs(1, False, 0, 0), LaceInputs(3, False, 1, 0))
    dataset = PatientDataset(_matrix(np.zeros((3, 1))), labels, ("a", "b", "c"), lace, None)
    report = lace_baseline(dataset)
    assert report.counts == ConfusionCounts(tp=1, fp=0, tn=2, fn=0)
    assert report.auc_roc == pytest.approx(1.0)
    partial = PatientDataset(dataset.matrix, labels, ("a", "b", "c"), lace[:2] + (None,), None)
    assert lace_baseline(partial) is None


# Feature selection

def test_majority_loo_accuracy():
    assert majority_loo_accuracy([0, 0, 0, 1]) == pytest.approx(0.75)
    assert majority_loo_accuracy([0, 0, 1, 1]) == 0.0


def test_forward_selection_counts_every_equidistant_neighbour():
    X = np.arange(6, dtype=float)[:, np.newaxis]
    y = np.array([0, 1, 0, 1, 1, 0])
    spec = ModelSpec("knn", {"k": 1, "standardize": False})
    order = [5, 3, 0, 4, 1, 2]
    result = sequential_forward_selection(X, y, ["a"], spec)
    permuted = sequential_forward_selection(X[order], y[order], ["a"], spec)
    assert result.accuracy_trace == permuted.accuracy_trace == [pytest.approx(2 / 6)]


def test_forward_selection_picks_predictive_feature():
    rng = np.random.default_rng(9)
    y = np.array([0, 1] * 15)
    X = np.column_stack((rng.standard_normal(30), 4.0 * y + 0.1 * rng.standard_normal(30),
                         rng.standard_normal(30)))
    result = sequential_forward_selection(X, y, ["a", "b", "c"])
    assert result.selected == ["b"]
    assert result.accuracy == pytest.approx(1.0)
    assert result.baseline_accuracy == 0.0


def test_forward_selection_with_generic_model():
    rng = np.random.default_rng(10)
    y = np.array([0, 1] * 10)
    X = np.column_stack((rng.standard_normal(20), 3.0 * y + 0.1 * rng.standard_normal(20)))
    result = sequential_forward_selection(X, y, ["noise", "signal"],
                                          spec=ModelSpec("logreg", {"standardize": False}))
    assert result.selected[0] == "signal"


def test_forward_selection_rejects_mismatched_names():
    with pytest.raises(DomainError):
        sequential_forward_selection(np.zeros((4, 2)), [0, 1, 0, 1], ["a"])


# Ablations and experiments

def test_modality_subsets():
    subsets = modality_subsets()
    assert len(subsets) == 7
    assert subsets[0] == ("Step",)
    assert subsets[-1] == ("Step", "HR", "Sleep")


def test_early_warning_grid(small_cohort, tiny_config):
    table = early_warning_grid(small_cohort, tiny_config)
    assert table["model"].tolist() == ["kmeans", "ocsvm"]
    assert {"window", "horizon", "normals", "anomalies", "auc_roc", "skipped"} <= set(table.columns)
    assert (table["anomalies"] > 0).all()


def test_risk_table(small_cohort, tiny_config):
    table = risk_table(small_cohort, tiny_config)
    assert table["model"].tolist() == ["knn", "logreg", "lace"]
    assert {"sensitivity", "specificity", "ppv", "accuracy"} <= set(table.columns)


def test_ablations(small_cohort, tiny_config):
    spec = ModelSpec("knn", {"k": 1, "standardize": False})
    modality = modality_ablation(small_cohort, spec, subsets=[("HR",), ("Step", "HR")],
                                 config=tiny_config)
    assert modality["modalities"].tolist() == ["HR", "Step+HR"]
    days = monitoring_length_ablation(small_cohort, spec, days=(3, 5), config=tiny_config)
    assert days["days"].tolist() == [3, 5]
    with pytest.raises(DomainError):
        modality_ablation(small_cohort, spec, subsets=[()], config=tiny_config)


def test_benchmark_contamination():
    benchmark = synthetic_anomaly_benchmark(seed=1)
    assert len(benchmark.labels) == 440
    assert benchmark.contaminated.sum() == 14
    assert not benchmark.contaminated[benchmark.labels == 1].any()
    with pytest.raises(DomainError):
        synthetic_anomaly_benchmark(contamination=1.0)


def test_nu_sweep_rows():
    benchmark = synthetic_anomaly_benchmark(seed=2, n_normals=60, n_anomalies=6, n_features=3)
    spec = spec_from_config("ocsvm", ExperimentConfig())
    table = nu_sweep(benchmark, spec, [0.05, 0.5], repeats=2, seed=0, workers=1)
    assert table["nu"].tolist() == [0.05, 0.5]
    assert (table["repeats"] == 2).all()
    assert table.loc[1, "sensitivity"] >= table.loc[0, "sensitivity"]


@pytest.mark.slow
def test_weighted_ocsvm_on_contaminated_benchmark():
    benchmark = synthetic_anomaly_benchmark(seed=0)
    config = ExperimentConfig()
    weighted = repeat_anomaly_eval(benchmark, spec_from_config("weighted_ocsvm", config),
                                   repeats=10, seed=0, workers=1)
    standard = repeat_anomaly_eval(benchmark, spec_from_config("ocsvm", config),
                                   repeats=10, seed=0, workers=1)
    assert weighted.mean()["sensitivity"] >= standard.mean()["sensitivity"] - 1e-9


@pytest.mark.slow
def test_early_warning_model_ordering_on_contaminated_benchmark():
    config = ExperimentConfig()
    names = ("weighted_ocsvm", "ocsvm", "lof", "kmeans")
    ordered, accuracy = 0, {name: [] for name in names}
    for seed in range(20):
        benchmark = synthetic_anomaly_benchmark(seed=seed)
        means = {name: repeat_anomaly_eval(benchmark, spec_from_config(name, config),
                                           repeats=20, seed=seed).mean()
                 for name in names}
        for name in names:
            accuracy[name].append(means[name]["accuracy"])
        baseline = max(means["lof"]["sensitivity"], means["kmeans"]["sensitivity"])
        ordered += means["weighted_ocsvm"]["sensitivity"] >= means["ocsvm"]["sensitivity"] > baseline
    assert ordered >= 15
    assert np.mean(accuracy["ocsvm"]) > 0.8
    assert np.mean(accuracy["weighted_ocsvm"]) >= np.mean(accuracy["ocsvm"]) - 0.05


def _risk_run(strength, seed):
    cohort = generate_synthetic_cohort(SynthConfig(days_per_patient=12, rng_seed=seed,
                                                   anomaly_signal_strength=strength))
    dataset = patient_dataset(cohort, k_days=12)
    knn = repeated_kfold(dataset.matrix, dataset.labels, ModelSpec("knn", {"k": 2, "standardize": False}),
                         k=5, repeats=5, seed=seed)
    majority = repeated_kfold(dataset.matrix, dataset.labels, ModelSpec("majority"), k=5, repeats=2,
                              seed=seed, feature_selection=False)
    return knn, majority, lace_baseline(dataset)


@pytest.mark.slow
def test_knn_beats_lace_with_injected_signal():
    knn, lace = [], []
    for seed in range(20):
        result, _, baseline = _risk_run(3.0, seed)
        knn.append(result.summary.mean()["accuracy"])
        lace.append(baseline.accuracy)
    assert np.mean(knn) > np.mean(lace)
    assert np.mean(knn) > 0.8


@pytest.mark.slow
def test_null_signal_cohort_stays_at_majority_rate():
    knn, auc = [], []
    for seed in range(20):
        result, majority, _ = _risk_run(0.0, seed)
        assert majority.summary.mean()["accuracy"] == pytest.approx(18 / 25)
        knn.append(result.summary.mean()["accuracy"])
        auc.append(result.summary.mean()["auc_roc"])
    assert np.mean(knn) <= 18 / 25 + 0.05
    assert np.nanmean(auc) < 0.65
