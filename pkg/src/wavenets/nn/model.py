"""Desk-scale residual classifier with channel attention in every block."""
from dataclasses import dataclass

import numpy as np

from ..filterbank import CHUNK, GROUP_SIZES, build_assignment
from ..tensor import Rng
from .layers import GlobalAvgPool, Linear, ReLU, Sequential, basic_block, bottleneck_block, conv_bn

VALID_SCALES = (1, 2, 4, 8, 16, 32, 64)


@dataclass
class ModelConfig:
    in_channels: int = 1
    num_classes: int = 4
    squeeze_mode: str = "wavenet_c"
    d: int = 2
    scale_factor: int = 8
    reduction: int = 4
    block: str = "basic"
    blocks_per_stage: int = 1
    seed: int = 1


class Network:
    """Stem, four residual stages, global pool and a linear head."""

    def __init__(self, stem, stages, head, config, assignment=None):
        self.stem = stem
        self.stages = stages
        self.pool = GlobalAvgPool()
        self.head = head
        self.config = config
        self.assignment = assignment
        self.output_norms = {}

    def modules(self):
        return [("stem", self.stem)] + [(s.name, s) for s in self.stages] + [("pool", self.pool), ("head", self.head)]

    def leaves(self):
        for _, m in self.modules():
            yield from m.leaves()

    def named_parameters(self):
        out = {}
        for leaf in self.leaves():
            for key, value in leaf.params.items():
                name = f"{leaf.name}.{key}"
                if name in out:
                    raise RuntimeError(f"duplicate parameter name {name}")
                out[name] = value
        return out

    def named_grads(self):
        return {f"{leaf.name}.{k}": v for leaf in self.leaves() for k, v in leaf.grads.items()}

    def named_buffers(self):
        return {f"{leaf.name}.{k}": v for leaf in self.leaves() for k, v in leaf.buffers.items()}

    def attention_layers(self):
        return [leaf for leaf in self.leaves() if leaf.name.startswith("att.")]

    def census(self):
        """Trainable parameter count per tensor name."""
        return {name: p.size for name, p in self.named_parameters().items()}

    def num_parameters(self):
        return sum(self.census().values())

    def train(self):
        for leaf in self.leaves():
            leaf.training = True
        return self

    def eval(self):
        for leaf in self.leaves():
            leaf.training = False
        return self

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        for name, module in self.modules():
            x = module.forward(x)
            self.output_norms[name] = float(np.linalg.norm(x))
        return x

    __call__ = forward

    def backward(self, grad):
        for _, module in reversed(self.modules()):
            grad = module.backward(grad)
        return grad


def stage_widths(config):
    s = config.scale_factor
    return [g // s for g in GROUP_SIZES]


def build_classifier(config):
    """Build the scaled residual classifier described by ``config``."""
    s = config.scale_factor
    if s not in VALID_SCALES:
        raise ValueError(f"scale factor must be one of {VALID_SCALES}, got {s}")
    if config.block not in ("basic", "bottleneck"):
        raise ValueError(f"block must be 'basic' or 'bottleneck', got {config.block!r}")
    master = Rng(config.seed)
    bank_rng, weight_rng = master.spawn(), master.spawn()
    assignment = build_assignment(bank_rng, config.d, s) if config.squeeze_mode == "wavenet_c" else None
    widths = stage_widths(config)
    stem = Sequential(conv_bn(config.in_channels, widths[0], 3, 1, weight_rng, "stem") + [ReLU()], "stem")
    stages = []
    in_ch = widths[0]
    for i, width in enumerate(widths):
        blocks = []
        for j in range(config.blocks_per_stage):
            stride = 2 if (i > 0 and j == 0) else 1
            name = f"stage{i + 1}.block{j}"
            if config.block == "basic":
                blk = basic_block(in_ch, width, stride, config.reduction, config.squeeze_mode,
                                  weight_rng, assignment, name)
                in_ch = width
            else:
                blk = bottleneck_block(in_ch, width, stride, config.reduction, config.squeeze_mode,
                                       weight_rng, assignment, name)
                in_ch = width * 4
            blocks.append(blk)
        stages.append(Sequential(blocks, f"stage{i + 1}"))
    head = Linear(in_ch, config.num_classes, weight_rng, "head")
    return Network(stem, stages, head, config, assignment)


def census_report(net):
    lines = [f"{name:48s} {count:8d}" for name, count in net.census().items()]
    att = sum(p.size for leaf in net.attention_layers() for p in leaf.params.values())
    lines.append(f"{'attention parameters':48s} {att:8d}")
    lines.append(f"{'total trainable parameters':48s} {net.num_parameters():8d}")
    return "\n".join(lines)


__all__ = ["CHUNK", "ModelConfig", "Network", "build_classifier", "census_report", "stage_widths"]
