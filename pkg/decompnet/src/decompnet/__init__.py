"""Compact transformer-style CNN over decomposed image tensors."""

from .blocks import FeedForwardConv, MultiHeadConv, TransConvLayer, floor_halving_pool
from .config import (
    NetConfig,
    layers_for_variance_index,
    layers_from_variance,
    variance_index,
)
from .data import ArchiveData, load_decomposed, normalize_tensors, per_class_mean_intensity
from .model import DecompositionNet, build_model, parameter_count
from .train import compute_metrics, config_from_archive, select_loss, train

__version__ = "0.1.0"

__all__ = [
    "ArchiveData",
    "DecompositionNet",
    "FeedForwardConv",
    "MultiHeadConv",
    "NetConfig",
    "TransConvLayer",
    "build_model",
    "compute_metrics",
    "config_from_archive",
    "floor_halving_pool",
    "layers_for_variance_index",
    "layers_from_variance",
    "load_decomposed",
    "normalize_tensors",
    "parameter_count",
    "per_class_mean_intensity",
    "select_loss",
    "train",
    "variance_index",
]
