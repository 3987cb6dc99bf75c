"""Network <-> checkpoint entries."""
import numpy as np

from .. import checkpoint
from ..attention import SQUEEZE_MODES
from ..filterbank import assignment_from_named
from ..wavelet import ORTHONORMAL, WaveletBank
from .model import ModelConfig, build_classifier

BLOCKS = ("basic", "bottleneck")
_INT_META = ("in_channels", "num_classes", "d", "scale_factor", "reduction", "blocks_per_stage", "seed")


def bank_entries(assignment, prefix="filters"):
    return {f"{prefix}.{name}": bank.filters for name, bank in assignment.named_banks().items()}


def banks_from_entries(entries, prefix="filters"):
    head = prefix + "."
    return {k[len(head):]: WaveletBank(v, ORTHONORMAL) for k, v in entries.items() if k.startswith(head)}


def network_entries(net, extra_meta=None):
    cfg = net.config
    entries = {f"meta.{k}": np.array([float(getattr(cfg, k))]) for k in _INT_META}
    entries["meta.squeeze_mode"] = np.array([float(SQUEEZE_MODES.index(cfg.squeeze_mode))])
    entries["meta.block"] = np.array([float(BLOCKS.index(cfg.block))])
    for k, v in (extra_meta or {}).items():
        entries[f"meta.{k}"] = np.atleast_1d(np.asarray(v, dtype=np.float64))
    entries.update(net.named_parameters())
    entries.update({f"buffer.{k}": v for k, v in net.named_buffers().items()})
    if net.assignment is not None:
        entries.update(bank_entries(net.assignment))
    return entries


def network_from_entries(entries):
    """Rebuild a network from checkpoint entries; returns (net, extra meta dict)."""
    kw = {k: int(entries[f"meta.{k}"][0]) for k in _INT_META}
    kw["squeeze_mode"] = SQUEEZE_MODES[int(entries["meta.squeeze_mode"][0])]
    kw["block"] = BLOCKS[int(entries["meta.block"][0])]
    net = build_classifier(ModelConfig(**kw))
    if net.assignment is not None:
        banks = banks_from_entries(entries)
        net.assignment = assignment_from_named(banks, kw["d"], kw["scale_factor"])
        for layer in net.attention_layers():
            layer.block.assignment = net.assignment
    for name, target in list(net.named_parameters().items()) + [
        (f"buffer.{k}", v) for k, v in net.named_buffers().items()
    ]:
        if name not in entries:
            raise checkpoint.CheckpointError(f"checkpoint lacks entry {name!r}")
        if entries[name].shape != target.shape:
            raise checkpoint.CheckpointError(f"{name}: shape {entries[name].shape} != expected {target.shape}")
        target[...] = entries[name]
    known = set(f"meta.{k}" for k in _INT_META) | {"meta.squeeze_mode", "meta.block"}
    extra = {k[5:]: v for k, v in entries.items() if k.startswith("meta.") and k not in known}
    return net, extra


def save_network(path, net, extra_meta=None):
    checkpoint.save(path, network_entries(net, extra_meta))


def load_network(path):
    return network_from_entries(checkpoint.load(path))
