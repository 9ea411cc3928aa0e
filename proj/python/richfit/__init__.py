# Apache License, Version 2.0, refer to LICENSE.txt
"""Richards-curve count models for daily epidemic incidence series."""

from ._core import (
    DataError,
    DimensionError,
    DomainError,
    Fit,
    InsufficientData,
    InvalidParameter,
    Model,
    NonConvergence,
    Richards,
    __version__,
    fit,
    forecast,
    pseudo_r2,
    read_dpc,
    rmspe,
    shapiro_wilk,
    smoothed_true_peak,
    weekday_design,
)

__all__ = [
    "DataError",
    "DimensionError",
    "DomainError",
    "Fit",
    "InsufficientData",
    "InvalidParameter",
    "Model",
    "NonConvergence",
    "Richards",
    "__version__",
    "fit",
    "forecast",
    "pseudo_r2",
    "read_dpc",
    "rmspe",
    "shapiro_wilk",
    "smoothed_true_peak",
    "weekday_design",
]
