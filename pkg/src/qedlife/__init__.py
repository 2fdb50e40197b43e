"""Nonparametric distribution estimates from truncated and censored samples."""

from .core import (
    INF,
    Box,
    Grid,
    IntervalSample,
    MassFunction,
    Observation,
    Region,
    cdf_eval,
    conditional,
    measure,
    observation_1d,
    quantile,
)
from .qed import DegenerateTruncation, EstimatorConfig, FitResult, Variant, adjusted_sample_size, fit

__all__ = [
    "INF", "Box", "Grid", "IntervalSample", "MassFunction", "Observation", "Region",
    "cdf_eval", "conditional", "measure", "observation_1d", "quantile",
    "DegenerateTruncation", "EstimatorConfig", "FitResult", "Variant", "adjusted_sample_size", "fit",
]
