"""Models module initialization"""
from .lace import LaceInputs, lace_classify, lace_score
from .standardize import Standardizer
from .kernels import KernelSpec, ensure_psd
from .ocsvm import (
    OcSvmModel,
    WeightedOcSvmModel,
    feature_importance,
    ocsvm_decide,
    train_ocsvm,
    train_weighted_ocsvm,
)
from .neighbors import KnnModel, LofModel, knn_predict, lof_score
from .clustering import KMeansModel, kmeans_anomaly_score
from .logistic import LogisticModel, logreg_predict_proba, logreg_train
from .baseline import MajorityClassifier
from .registry import ModelSpec, build_estimator, load_model, save_model, spec_from_config

__all__ = [
    'LaceInputs', 'lace_classify', 'lace_score', 'Standardizer', 'KernelSpec', 'ensure_psd',
    'OcSvmModel', 'WeightedOcSvmModel', 'feature_importance', 'ocsvm_decide', 'train_ocsvm',
    'train_weighted_ocsvm', 'KnnModel', 'LofModel', 'knn_predict', 'lof_score',
    'KMeansModel', 'kmeans_anomaly_score', 'LogisticModel', 'logreg_predict_proba',
    'logreg_train', 'MajorityClassifier', 'ModelSpec', 'build_estimator', 'load_model',
    'save_model', 'spec_from_config',
]
