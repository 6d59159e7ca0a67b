"""Features module initialization"""
from .segmentation import (
    AwakeWindow,
    SedentaryBout,
    extract_sedentary_bouts,
    segment_awake,
)
from .statistics import (
    CooccurrenceMatrix,
    cooccurrence_features,
    cooccurrence_matrix,
    dfa_fluctuation,
    first_order_stats,
)
from .catalog import FEATURE_CATALOG, FeatureSpec, build_catalog, catalog_manifest, feature_names
from .assembly import (
    FeatureExtractor,
    FeatureMatrix,
    FeatureVector,
    TEXTURE_FEATURES,
    TextureSource,
    assemble_daily_features,
    assemble_patient_features,
    quantization_range,
)
from .imputation import apply_imputation, fit_imputation_means, impute_missing

__all__ = [
    'AwakeWindow', 'SedentaryBout', 'extract_sedentary_bouts', 'segment_awake',
    'CooccurrenceMatrix', 'cooccurrence_features', 'cooccurrence_matrix', 'dfa_fluctuation',
    'first_order_stats', 'FEATURE_CATALOG', 'FeatureSpec', 'build_catalog', 'catalog_manifest',
    'feature_names', 'FeatureExtractor', 'FeatureMatrix', 'FeatureVector',
    'TEXTURE_FEATURES', 'TextureSource',
    'assemble_daily_features', 'assemble_patient_features', 'quantization_range',
    'apply_imputation', 'fit_imputation_means', 'impute_missing',
]
