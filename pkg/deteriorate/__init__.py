"""Deteriorate package initialization"""
__version__ = "1.0.0"

from .errors import (
    CohortError,
    ConfigError,
    DataError,
    DeteriorateError,
    DomainError,
    InvariantError,
    OrderingError,
    ParseError,
)
from .settings import ExperimentConfig, FeatureConfig, PipelineConfig, SynthConfig

__all__ = [
    '__version__', 'CohortError', 'ConfigError', 'DataError', 'DeteriorateError', 'DomainError',
    'InvariantError', 'OrderingError', 'ParseError', 'ExperimentConfig', 'FeatureConfig',
    'PipelineConfig', 'SynthConfig',
]
