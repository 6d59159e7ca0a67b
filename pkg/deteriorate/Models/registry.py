"""
Model construction by name and versioned JSON persistence.
"""

import json
import logging
from dataclasses import dataclass, field

from deteriorate.errors import ConfigError, DataError
from deteriorate.Models.baseline import MajorityClassifier
from deteriorate.Models.clustering import KMeansModel
from deteriorate.Models.kernels import KernelSpec
from deteriorate.Models.logistic import LogisticModel
from deteriorate.Models.neighbors import KnnModel, LofModel
from deteriorate.Models.ocsvm import OcSvmModel, WeightedOcSvmModel

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

MODEL_CLASSES = {
    cls.KIND: cls
    for cls in (WeightedOcSvmModel, OcSvmModel, LofModel, KMeansModel, KnnModel,
                LogisticModel, MajorityClassifier)
}

# Models trained on normal examples only
SEMI_SUPERVISED = ("weighted_ocsvm", "ocsvm", "lof", "kmeans")


@dataclass(frozen=True)
class ModelSpec:
    """Model name plus constructor keyword arguments."""

    name: str
    params: dict = field(default_factory=dict)

    @property
    def semi_supervised(self):
        return self.name in SEMI_SUPERVISED

    def with_params(self, **params):
        return ModelSpec(self.name, {**self.params, **params})

    def to_dict(self):
        params = {key: (value.to_dict() if isinstance(value, KernelSpec) else value)
                  for key, value in self.params.items()}
        return {"name": self.name, "params": params}


def spec_from_config(name, config):
    """
    ModelSpec for a model name with hyper-parameters from an ExperimentConfig.

    Inputs are standardized by the evaluation protocols, so the models are
    built without their own standardizer.
    """
    kernel = KernelSpec(config.kernel, config.gamma)
    params = {
        "weighted_ocsvm": {"nu": config.nu, "beta": config.beta, "kernel": kernel},
        "ocsvm": {"nu": config.nu, "kernel": kernel},
        "lof": {"k_neighbors": config.lof_neighbors},
        "kmeans": {"k_clusters": config.kmeans_clusters, "seed": config.seed},
        "knn": {"k": config.knn_k},
        "logreg": {"C": config.logreg_c},
        "majority": {},
    }
    if name not in params:
        raise ConfigError(f"unknown model {name!r}")
    spec = ModelSpec(name, params[name])
    return spec if name == "majority" else spec.with_params(standardize=False)


def build_estimator(spec):
    """Fresh, untrained model instance for a ModelSpec."""
    try:
        cls = MODEL_CLASSES[spec.name]
    except KeyError as error:
        raise ConfigError(f"unknown model {spec.name!r}") from error
    return cls(**spec.params)


def save_model(model, path, metadata=None):
    """
    Write a trained model as versioned JSON.

    Args:
        model: trained model exposing KIND and to_dict()
        path (str): destination file
        metadata (dict, optional): training metadata such as the seed
    """
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": model.KIND,
        "metadata": metadata or {},
        "state": model.to_dict(),
    }
    with open(path, "w", encoding="utf-8") as file:
        json.dump(payload, file, indent=2, sort_keys=True)
        file.write("\n")
    logger.info("Saved %s model to %s", model.KIND, path)


def load_model(path):
    """
    Read a model written by save_model.

    Raises:
        DataError: unreadable file, unknown format version or model kind
    """
    try:
        with open(path, "r", encoding="utf-8") as file:
            payload = json.load(file)
    except (FileNotFoundError, json.JSONDecodeError, OSError) as error:
        raise DataError(f"cannot read model file {path}: {error}") from error
    if payload.get("format_version") != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported model format {payload.get('format_version')!r}")
    try:
        cls = MODEL_CLASSES[payload["kind"]]
    except KeyError as error:
        raise DataError(f"{path}: unknown model kind {payload.get('kind')!r}") from error
    return cls.from_dict(payload["state"])
