"""Uncertainty scoring from a Gaussian-RKHS potential field of model weights.

The library builds a kernel field over pooled network weights, extracts
Hermite-mode curvature corrections at each model output, and averages
them into a per-prediction uncertainty score.  Companion modules supply
the evaluation metrics, covariate-shift corruptions, and a toy MLP for
the illustrative regression experiments.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateDataError,
    InvalidArgumentError,
    NumericalFailureError,
    QipfError,
    TrainingFailureError,
    UndefinedMetricError,
    UnsupportedOrderError,
)
from .hermite_modes import (
    ModeDecomposition,
    QipfConfig,
    decompose,
    hermite_normalized,
    uncertainty_score,
)
from .kernel_field import (
    FieldEval,
    WeightField,
    effective_sigma,
    evaluate_field,
    gaussian_kernel,
    silverman_bandwidth,
)
from .weight_ingest import (
    Layer,
    PredictionRecord,
    WeightBundle,
    load_bundle,
    load_predictions,
    pool_weights,
    save_bundle,
)

__all__ = [
    "__version__",
    "QipfError",
    "InvalidArgumentError",
    "DegenerateDataError",
    "UnsupportedOrderError",
    "UndefinedMetricError",
    "NumericalFailureError",
    "TrainingFailureError",
    "WeightField",
    "FieldEval",
    "gaussian_kernel",
    "evaluate_field",
    "silverman_bandwidth",
    "effective_sigma",
    "QipfConfig",
    "ModeDecomposition",
    "hermite_normalized",
    "decompose",
    "uncertainty_score",
    "Layer",
    "WeightBundle",
    "PredictionRecord",
    "load_bundle",
    "save_bundle",
    "pool_weights",
    "load_predictions",
]
