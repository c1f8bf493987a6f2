"""Distinctive visual element matching for search-based image geo-location."""

from .core import Config, ConfigError, CorrespondenceRecord, DataError, ImageMeta, QueryMeta, validate_dataset
from .pipeline import QueryData, QueryResult, run_pipeline, run_query

__all__ = [
    "Config",
    "ConfigError",
    "CorrespondenceRecord",
    "DataError",
    "ImageMeta",
    "QueryData",
    "QueryMeta",
    "QueryResult",
    "run_pipeline",
    "run_query",
    "validate_dataset",
]
