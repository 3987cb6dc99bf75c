"""Minimal layer-based training stack."""
from .layers import (Attention, BatchNorm2d, Conv2d, GlobalAvgPool, Linear, ReLU, Residual,
                     Sequential, basic_block, bottleneck_block)
from .model import ModelConfig, Network, build_classifier, census_report
from .train import (SGD, TrainConfig, TrainingDiverged, cross_entropy_label_smoothing, evaluate,
                    lr_at, sgd_step, train, write_metrics)

__all__ = [
    "Attention", "BatchNorm2d", "Conv2d", "GlobalAvgPool", "Linear", "ModelConfig", "Network", "ReLU",
    "Residual", "SGD", "Sequential", "TrainConfig", "TrainingDiverged", "basic_block", "bottleneck_block",
    "build_classifier", "census_report", "cross_entropy_label_smoothing", "evaluate", "lr_at",
    "sgd_step", "train", "write_metrics",
]
