import json
import math
from datetime import date

import numpy as np
import pandas as pd
import pytest

from deteriorate.errors import DomainError
from deteriorate.Features import (
    FEATURE_CATALOG,
    AwakeWindow,
    FeatureMatrix,
    FeatureVector,
    apply_imputation,
    assemble_daily_features,
    assemble_patient_features,
    build_catalog,
    catalog_manifest,
    cooccurrence_features,
    cooccurrence_matrix,
    dfa_fluctuation,
    extract_sedentary_bouts,
    feature_names,
    fit_imputation_means,
    first_order_stats,
    impute_missing,
    quantization_range,
    segment_awake,
)
from deteriorate.Features.segmentation import awake_window_of_day, sedentary_bouts_of_day
from deteriorate.settings import FeatureConfig

DAY = date(2017, 1, 2)


def test_first_order_stats_oracle():
    stats = first_order_stats([1, 2, 3, 4, 5])
    assert stats["mean"] == pytest.approx(3.0)
    assert stats["std"] == pytest.approx(math.sqrt(2.0))
    assert stats["skewness"] == pytest.approx(0.0, abs=1e-12)
    assert stats["kurtosis"] == pytest.approx(34 / 16 - 3)
    assert (stats["min"], stats["max"]) == (1.0, 5.0)


def test_first_order_stats_skewed_sample():
    x = np.array([1.0, 1.0, 1.0, 5.0])
    sigma = np.sqrt(np.mean((x - x.mean()) ** 2))
    expected = np.sum((x - x.mean()) ** 3) / (3 * sigma ** 3)
    assert first_order_stats(x)["skewness"] == pytest.approx(expected)
    assert first_order_stats(x)["skewness"] > 0


def test_first_order_stats_small_samples():
    one = first_order_stats([7.0])
    assert one["mean"] == 7.0 and math.isnan(one["std"]) and math.isnan(one["skewness"])
    constant = first_order_stats([2.0, 2.0, 2.0])
    assert constant["std"] == 0.0 and math.isnan(constant["kurtosis"])
    assert all(math.isnan(v) for v in first_order_stats([np.nan]).values())


def _brute_force_stats(values):
    n = len(values)
    mean = math.fsum(values) / n
    sigma = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / n)
    return {
        "mean": mean,
        "std": sigma,
        "skewness": math.fsum((v - mean) ** 3 for v in values) / ((n - 1) * sigma ** 3),
        "kurtosis": math.fsum((v - mean) ** 4 for v in values) / ((n - 1) * sigma ** 4) - 3.0,
        "min": min(values),
        "max": max(values),
    }


def test_first_order_stats_match_brute_force_on_random_series():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        size = int(rng.integers(3, 200))
        values = rng.normal(rng.uniform(-50, 150), rng.uniform(0.1, 20), size).tolist()
        stats = first_order_stats(values)
        for name, expected in _brute_force_stats(values).items():
            assert stats[name] == pytest.approx(expected, rel=1e-9, abs=1e-9), name


def test_dfa_constant_series_is_zero():
    assert dfa_fluctuation(np.full(100, 3.0), 10) == 0.0


def test_dfa_domain():
    with pytest.raises(DomainError):
        dfa_fluctuation(np.arange(100.0), 3)
    with pytest.raises(DomainError):
        dfa_fluctuation(np.arange(15.0), 8)


DFA_WINDOWS = (4, 8, 16, 32, 64)


def _dfa_slope(values, windows=DFA_WINDOWS):
    fluctuations = [dfa_fluctuation(values, n) for n in windows]
    return np.polyfit(np.log(windows), np.log(fluctuations), 1)[0]


def test_dfa_scaling_exponents():
    paths = np.random.default_rng(0).standard_normal((8, 10_000))
    white = np.mean([_dfa_slope(noise) for noise in paths])
    brownian = np.mean([_dfa_slope(np.cumsum(noise)) for noise in paths])
    assert white == pytest.approx(0.5, abs=0.05)
    assert brownian == pytest.approx(1.5, abs=0.1)


def test_dfa_raw_fluctuation_follows_short_window_law():
    noise = np.random.default_rng(1).standard_normal(100_000)
    for n in (4, 8, 16):
        raw = dfa_fluctuation(noise, n, small_scale_correction=False)
        assert raw ** 2 == pytest.approx((n * n - 4) / (15 * n), rel=0.05)
        assert dfa_fluctuation(noise, n) == pytest.approx(raw * np.sqrt(n * n / (n * n - 4)))


def test_dfa_is_linear_in_the_signal():
    noise = np.random.default_rng(2).standard_normal(500)
    assert dfa_fluctuation(3.5 * noise, 10) == pytest.approx(3.5 * dfa_fluctuation(noise, 10))


def test_cooccurrence_of_constant_series():
    features = cooccurrence_features(np.full(50, 80.0), levels=16)
    assert features["energy"] == pytest.approx(1.0)
    assert features["entropy"] == pytest.approx(0.0)
    assert features["inertia"] == pytest.approx(0.0)
    assert features["local_homogeneity"] == pytest.approx(1.0)
    assert math.isnan(features["correlation"])


def test_cooccurrence_of_alternating_series():
    values = [0, 1, 0, 1, 0, 1, 0, 1, 0]
    matrix = cooccurrence_matrix(values, levels=2, value_range=(0, 1))
    assert matrix.counts.tolist() == [[0, 4], [4, 0]]
    features = cooccurrence_features(values, levels=2, value_range=(0, 1))
    assert features["energy"] == pytest.approx(0.5)
    assert features["entropy"] == pytest.approx(-math.log(2))
    assert features["inertia"] == pytest.approx(1.0)
    assert features["local_homogeneity"] == pytest.approx(0.5)


def test_cooccurrence_skips_missing_pairs():
    matrix = cooccurrence_matrix([0, np.nan, 1, 0, 1], levels=2, value_range=(0, 1))
    assert matrix.n_pairs == 2
    assert all(math.isnan(v) for v in cooccurrence_features([np.nan, np.nan]).values())
    with pytest.raises(DomainError):
        cooccurrence_matrix([1.0], lag=1)


def _steps_day():
    day = np.zeros(1440)
    day[480:1200] = 5
    return day


def test_awake_window_closes_on_first_lull():
    window = awake_window_of_day(_steps_day(), DAY)
    assert (window.awake_minute, window.sleep_minute) == (480, 1229)
    assert window.minutes == 749
    assert window.awake_time.hour == 8


def test_lull_is_the_trailing_window_before_the_instant():
    day = _steps_day()
    # quiet since 16:40, so 19:00 already closes the window
    day[1000:] = 0
    assert awake_window_of_day(day, DAY).sleep_minute == 1140


def test_awake_window_without_lull_ends_at_midnight():
    day = np.zeros(1440)
    day[600:] = 20
    assert awake_window_of_day(day, DAY).sleep_minute == 1440


def test_awake_window_undefined_without_steps():
    day = np.zeros(1440)
    day[100:200] = 50
    assert awake_window_of_day(day, DAY) is None


def test_segment_awake_reads_series(series_factory):
    minutes = np.arange(480, 1200)
    steps = series_factory("steps", minutes, np.full(minutes.size, 5))
    window = segment_awake(steps, DAY)
    assert window == AwakeWindow(DAY, 480, 1229)


def test_sedentary_bouts_break_on_missing_minutes():
    day = np.ones(1440)
    day[500:510] = 0
    day[510] = np.nan
    day[511:515] = 0
    bouts = sedentary_bouts_of_day(day, AwakeWindow(DAY, 480, 1200))
    assert [(b.start, b.end) for b in bouts] == [(500, 510), (511, 515)]
    assert [b.duration for b in bouts] == [10, 4]


def test_extract_sedentary_bouts_from_series(series_factory):
    minutes = np.setdiff1d(np.arange(480, 1200), [650])
    values = np.full(minutes.size, 5.0)
    values[(minutes >= 600) & (minutes < 620)] = 0
    values[(minutes >= 640) & (minutes < 656)] = 0
    steps = series_factory("steps", minutes, values)
    bouts = extract_sedentary_bouts(steps, segment_awake(steps, DAY))
    assert [(b.start, b.end) for b in bouts] == [(600, 620), (640, 650), (651, 656)]


def test_catalog_layout():
    assert len(FEATURE_CATALOG) == 51
    assert len(feature_names(tags=("Step",))) == 9
    assert len(feature_names(tags=("HR",))) == 12
    assert len(feature_names(tags=("Sleep",))) == 30
    assert len({spec.name for spec in FEATURE_CATALOG}) == 51
    assert catalog_manifest()["n_features"] == 51
    assert len(build_catalog(FeatureConfig(hr_dfa_windows=(10, 20)))) == 52


def test_feature_names_rejects_bad_subsets():
    with pytest.raises(DomainError):
        feature_names(tags=())
    with pytest.raises(DomainError):
        feature_names(tags=("Temperature",))


def test_feature_vector_marks_missing():
    vector = FeatureVector("x", {"a": 1, "b": None, "c": float("inf")})
    assert vector.missing == {"b", "c"}
    assert math.isnan(vector.values["b"])


def _frame(rows):
    return FeatureMatrix(pd.DataFrame(rows, columns=["a", "b"], dtype=float))


def test_imputation_uses_training_means():
    train = _frame([[1.0, np.nan], [3.0, 4.0]])
    test = _frame([[np.nan, 10.0]])
    means = fit_imputation_means(train)
    assert means.to_dict() == {"a": 2.0, "b": 4.0}
    imputed = apply_imputation(test, means)
    assert imputed.values.iloc[0].tolist() == [2.0, 10.0]
    assert imputed.mask.iloc[0].tolist() == [True, False]
    assert impute_missing(train).values.iloc[0].tolist() == [1.0, 4.0]


def test_imputation_rejects_unobserved_feature():
    with pytest.raises(DomainError):
        fit_imputation_means(_frame([[1.0, np.nan], [2.0, np.nan]]))


def test_patient_features(small_cohort):
    record = small_cohort[0]
    vector = assemble_patient_features(record, 7, hr_range=quantization_range(small_cohort))
    assert vector.example_id == record.patient_id
    assert list(vector.values) == [spec.name for spec in FEATURE_CATALOG]
    assert not {"hr_mean", "step_daily_mean", "hr_entropy"} & vector.missing
    with pytest.raises(DomainError):
        assemble_patient_features(record, record.n_days + 1)


def test_sleep_features_missing_without_sleep_data(small_cohort):
    record = next(r for r in small_cohort if len(r.sleep_status) == 0)
    vector = assemble_daily_features(record, (record.monitoring_start, record.monitoring_end))
    assert {"sleep_status_skewness", "sleep_efficiency", "time_in_bed_mean"} <= vector.missing
    assert "hr_mean" not in vector.missing


def test_feature_matrix_export(tmp_path, small_cohort):
    vectors = [assemble_patient_features(r, 3) for r in small_cohort]
    matrix = FeatureMatrix.from_vectors(vectors)
    assert matrix.values.shape == (len(small_cohort), 51)
    assert matrix.restrict_tags(("HR",)).values.shape[1] == 12
    csv_path, mask_path = tmp_path / "features.csv", tmp_path / "missing.json"
    matrix.export(str(csv_path), str(mask_path))
    assert pd.read_csv(csv_path, index_col=0).shape == (len(small_cohort), 51)
    with open(mask_path, encoding="utf-8") as file:
        missing = json.load(file)["missing"]
    for example, row in matrix.mask.iterrows():
        assert missing[example] == [c for c in matrix.columns if row[c]]
