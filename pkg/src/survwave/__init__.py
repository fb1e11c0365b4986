"""Wavelet density estimation for right-censored lifetimes."""

from ._backend import BACKEND
from .censoring import CensoredSample, ipcw_weights, km_censoring, km_event, rank_sample
from .errors import SurvWaveError
from .estimator import (
    DensityEstimate,
    evaluate,
    fit,
    fit_complete,
    fit_partial,
    normalize,
    pointwise_variance,
    postprocess,
    select_level,
)
from .wavelet_basis import (
    PeriodizedIndex,
    WaveletFilter,
    eval_periodized,
    eval_scaling,
    list_filters,
    load_filter,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CensoredSample",
    "DensityEstimate",
    "PeriodizedIndex",
    "SurvWaveError",
    "WaveletFilter",
    "eval_periodized",
    "eval_scaling",
    "evaluate",
    "fit",
    "fit_complete",
    "fit_partial",
    "ipcw_weights",
    "km_censoring",
    "km_event",
    "list_filters",
    "load_filter",
    "normalize",
    "pointwise_variance",
    "postprocess",
    "rank_sample",
    "select_level",
]
