"""Recurrent intrusion detection for industrial control traffic.

Two recurrent cores, an attention-gated cell and a GRU baseline, wrapped
in a complete pipeline: CSV preprocessing, windowing, training, evaluation,
and an operation-count benchmark with compiled fast-path kernels.
"""

__version__ = "0.1.0"

from .arn import ArnParams, arn_step, arn_step_backward, init_arn_params
from .attention import SattParams, init_satt_params, satt_backward, satt_forward
from .checkpoint import load_checkpoint, save_checkpoint
from .evaluation import MetricsReport, evaluate
from .gru import GruParams, gru_step, gru_step_backward, init_gru_params
from .model import Classifier, ModelConfig, init_classifier, predict, predict_proba
from .numeric import make_rng
from .training import TrainConfig, train

__all__ = [
    "ArnParams",
    "Classifier",
    "GruParams",
    "MetricsReport",
    "ModelConfig",
    "SattParams",
    "TrainConfig",
    "arn_step",
    "arn_step_backward",
    "evaluate",
    "gru_step",
    "gru_step_backward",
    "init_arn_params",
    "init_classifier",
    "init_gru_params",
    "init_satt_params",
    "load_checkpoint",
    "make_rng",
    "predict",
    "predict_proba",
    "satt_backward",
    "satt_forward",
    "save_checkpoint",
    "train",
    "__version__",
]
