"""Base classifiers, model selection and probability calibration."""

from .base import ModelError, TrainedModel
from .calibration import CalibratedModel, CalibrationWarning, fit_sigmoid, platt_calibrate, predict_proba
from .forest import ForestModel, fit_forest
from .linear import LinearModel, fit_linear
from .metrics import f1_macro
from .selection import FOREST_GRID, LINEAR_GRID, PipelineSpec, default_pipeline, grid_search

__all__ = [
    "CalibratedModel", "CalibrationWarning", "FOREST_GRID", "ForestModel", "LINEAR_GRID",
    "LinearModel", "ModelError", "PipelineSpec", "TrainedModel", "default_pipeline",
    "f1_macro", "fit_forest", "fit_linear", "fit_sigmoid", "grid_search", "platt_calibrate",
    "predict_proba",
]
