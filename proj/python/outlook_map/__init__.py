"""Map labeled data between feature spaces that share a classification task."""

from ._core import (
    InputError,
    NumericalError,
    MultiOutlookModel,
    OutlookMapping,
    ScalerParams,
    apply_scaler,
    balanced_error_rate,
    fit_multi_outlook,
    fit_scaler,
    fit_two_outlooks,
    knn_classify,
    load_mapping,
    match_by_rotation,
    sample_mixture,
    utilization_matrix,
)

__all__ = [
    "InputError",
    "NumericalError",
    "MultiOutlookModel",
    "OutlookMapping",
    "ScalerParams",
    "apply_scaler",
    "balanced_error_rate",
    "fit_multi_outlook",
    "fit_scaler",
    "fit_two_outlooks",
    "knn_classify",
    "load_mapping",
    "match_by_rotation",
    "sample_mixture",
    "utilization_matrix",
]
