import json

import pytest

from deteriorate.errors import ConfigError
from deteriorate.settings import ExperimentConfig, FeatureConfig, PipelineConfig, SynthConfig, load_json


def test_defaults_match_documented_values():
    assert SynthConfig().n_patients == 25
    assert SynthConfig().n_deteriorated == 7
    assert SynthConfig().sync_cadence == 15
    assert PipelineConfig().min_daily_heart_rate == 5400
    assert ExperimentConfig().nu == pytest.approx(0.09)
    assert ExperimentConfig().knn_k == 2


def test_load_round_trips_through_json(tmp_path):
    config = ExperimentConfig(windows=(1, 2), horizons=(3,), repeats=5,
                              features=FeatureConfig(quantization_levels=8))
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(config.to_dict()), encoding="utf-8")
    loaded = ExperimentConfig.load(str(path))
    assert loaded == config
    assert loaded.features.quantization_levels == 8


@pytest.mark.parametrize("data", [
    {"n_patients": 0},
    {"days_per_patient": 0},
    {"n_deteriorated": 30},
    {"missingness": {"steps": 1.5}},
    {"unknown_key": 1},
])
def test_invalid_synth_config(data):
    with pytest.raises(ConfigError):
        SynthConfig.from_dict(data)


def test_invalid_experiment_config():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"windows": [0]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"label_mode": "sometime"})


def test_load_json_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_json(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON"):
        load_json(str(broken))


def test_config_error_is_value_error():
    with pytest.raises(ValueError):
        PipelineConfig(min_battery="full")
