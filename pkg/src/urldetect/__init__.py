"""Character-level Bi-LSTM malicious URL classifier."""

from .classifier import Hyperparams, ModelParams, Prediction, load, predict, save
from .corpus import (
    EncodedSequence,
    SplitSpec,
    UrlClass,
    UrlRecord,
    Vocabulary,
    default_vocabulary,
    encode_url,
    load_csv,
    stratified_split,
)
from .evaluator import EvalReport, confusion, metrics, render_report
from .trainer import TrainConfig, TrainHistory, evaluate_on, fit

__version__ = "0.1.0"

__all__ = [
    "EncodedSequence",
    "EvalReport",
    "Hyperparams",
    "ModelParams",
    "Prediction",
    "SplitSpec",
    "TrainConfig",
    "TrainHistory",
    "UrlClass",
    "UrlRecord",
    "Vocabulary",
    "confusion",
    "default_vocabulary",
    "encode_url",
    "evaluate_on",
    "fit",
    "load",
    "load_csv",
    "metrics",
    "predict",
    "render_report",
    "save",
    "stratified_split",
]
