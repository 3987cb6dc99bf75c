"""Central finite-difference gradient checks."""
import numpy as np

from .attention import AttentionBlock
from .filterbank import build_assignment
from .nn.layers import Attention, BatchNorm2d, Conv2d, GlobalAvgPool, Linear, ReLU, Sequential
from .nn.train import cross_entropy_label_smoothing
from .tensor import Rng

EPS = 1e-5


def relative_error(analytic, numeric):
    """max |a - n| scaled by the largest numeric magnitude (floored at 1e-8)."""
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    return float(np.max(np.abs(analytic - numeric)) / max(np.max(np.abs(numeric)), 1e-8))


def numeric_grad(f, x, eps=EPS):
    """Central differences of scalar ``f()`` w.r.t. array ``x``, perturbed in place."""
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        old = x[idx]
        x[idx] = old + eps
        fp = f()
        x[idx] = old - eps
        fm = f()
        x[idx] = old
        g[idx] = (fp - fm) / (2 * eps)
    return g


def check_attention_block(mode, seed, channels=8, size=4, reduction=2, batch=2):
    """Worst relative error over the input and every trainable tensor."""
    rng = Rng(seed)
    assignment = build_assignment(rng.spawn(), 2, scale=8) if mode == "wavenet_c" else None
    block = AttentionBlock(channels, reduction, mode, rng, assignment)
    if block.combine_weights is not None:
        # move off the (1, 0, 0, 0) start so every subband contributes
        block.combine_weights[:] = [1.0, 0.0, 0.0, 0.0] + rng.normal((4,), 0.3)
    x = rng.normal((batch, channels, size, size))
    w = rng.normal(x.shape)

    def f():
        return float(np.sum(block.forward(x).x_scaled * w))

    f()
    grad_x = block.backward(w)
    grads = dict(block.grads)
    errors = {"x": relative_error(grad_x, numeric_grad(f, x))}
    for name, p in block.parameters().items():
        errors[name] = relative_error(grads[name], numeric_grad(f, p))
    return errors


def micro_net(mode, seed, channels=8, in_channels=1, classes=3):
    rng = Rng(seed)
    assignment = build_assignment(rng.spawn(), 2, scale=8) if mode == "wavenet_c" else None
    net = Sequential([
        Conv2d(in_channels, channels, 3, 1, 1, rng, "conv1"),
        BatchNorm2d(channels, name="bn1"),
        ReLU(),
        Conv2d(channels, channels, 3, 1, 1, rng, "conv2"),
        Attention(channels, 2, mode, rng, assignment, "att.micro"),
        GlobalAvgPool(),
        Linear(channels, classes, rng, "head"),
    ])
    for leaf in net.leaves():
        if isinstance(leaf, Attention) and leaf.block.combine_weights is not None:
            leaf.block.combine_weights[:] = [1.0, 0.0, 0.0, 0.0] + rng.normal((4,), 0.3)
    return net, rng


def check_micro_net(mode, seed, size=8, batch=4, classes=3):
    net, rng = micro_net(mode, seed, classes=classes)
    x = rng.normal((batch, 1, size, size))
    labels = rng.integers(0, classes, batch)

    def f():
        loss, _ = cross_entropy_label_smoothing(net.forward(x), labels, 0.1)
        return loss

    _, grad = cross_entropy_label_smoothing(net.forward(x), labels, 0.1)
    grad_x = net.backward(grad)
    analytic = {f"{leaf.name}.{k}": v.copy() for leaf in net.leaves() for k, v in leaf.grads.items()}
    errors = {"x": relative_error(grad_x, numeric_grad(f, x))}
    for leaf in net.leaves():
        for k, p in leaf.params.items():
            name = f"{leaf.name}.{k}"
            errors[name] = relative_error(analytic[name], numeric_grad(f, p))
    return errors
