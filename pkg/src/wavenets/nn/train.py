"""Loss, learning-rate schedule, SGD with momentum and the training loop."""
import csv
from dataclasses import asdict, dataclass
import logging
import math

import numpy as np

from ..tensor import Rng
from .model import ModelConfig, build_classifier

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; message lists per-module output norms."""


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 64
    lr0: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 5e-4
    label_smoothing: float = 0.1
    restart_period: int = 10
    lr_decay_on_restart: float = 0.9
    seed: int = 1

    def __post_init__(self):
        for key in ("epochs", "batch_size", "restart_period"):
            if getattr(self, key) < 1:
                raise ValueError(f"{key} must be a positive integer")
        if self.lr0 <= 0 or not 0 <= self.momentum < 1 or self.weight_decay < 0:
            raise ValueError("lr0 must be positive, momentum in [0, 1), weight_decay >= 0")
        if not 0 <= self.label_smoothing < 1:
            raise ValueError(f"label_smoothing must be in [0, 1), got {self.label_smoothing}")
        if not 0 < self.lr_decay_on_restart <= 1:
            raise ValueError("lr_decay_on_restart must be in (0, 1]")


def log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cross_entropy_label_smoothing(logits, labels, eps=0.0):
    """Mean cross-entropy against smoothed targets, and its gradient w.r.t. logits.

    Targets put ``1 - eps + eps/K`` on the true class and ``eps/K`` on every
    other class, so they sum to one.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    n, k = logits.shape
    if not 0 <= eps < 1:
        raise ValueError(f"label smoothing must be in [0, 1), got {eps}")
    if labels.shape != (n,) or labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels must be {n} integers in [0, {k})")
    target = np.full((n, k), eps / k)
    target[np.arange(n), labels] += 1.0 - eps
    logp = log_softmax(logits)
    loss = -np.sum(target * logp) / n
    grad = (np.exp(logp) - target) / n
    return float(loss), grad


def lr_at(step, steps_per_epoch, config):
    """Cosine annealing with warm restarts; each restart's peak is decayed.

    Within restart ``r`` the rate falls from ``lr0 * decay**r`` to 0 along a
    half cosine over ``restart_period`` epochs.
    """
    epoch = step / steps_per_epoch
    r = int(epoch // config.restart_period)
    frac = (epoch - r * config.restart_period) / config.restart_period
    peak = config.lr0 * config.lr_decay_on_restart ** r
    return peak * 0.5 * (1.0 + math.cos(math.pi * frac))


class SGD:
    """Momentum SGD: ``v = m*v + g + wd*theta``; ``theta -= lr * v`` (in place)."""

    def __init__(self, params, momentum=0.9, weight_decay=0.0):
        self.params = params
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.velocity = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads, lr):
        for name, p in self.params.items():
            g = grads[name] + self.weight_decay * p
            v = self.velocity[name]
            v *= self.momentum
            v += g
            p -= lr * v


def sgd_step(params, grads, velocity, config, lr):
    """Functional form of one :class:`SGD` update over dicts of arrays."""
    for name, p in params.items():
        v = velocity.setdefault(name, np.zeros_like(p))
        v *= config.momentum
        v += grads[name] + config.weight_decay * p
        p -= lr * v


def _diverged(net, loss):
    norms = ", ".join(f"{k}={v:.3e}" for k, v in net.output_norms.items())
    return TrainingDiverged(f"non-finite loss {loss}; module output norms: {norms}")


def evaluate(net, images, labels, batch_size=256, eps=0.0):
    """Return (mean loss, top-1 accuracy) in eval mode."""
    net.eval()
    total_loss, correct = 0.0, 0
    n = len(labels)
    for start in range(0, n, batch_size):
        xb = images[start:start + batch_size]
        yb = labels[start:start + batch_size]
        logits = net.forward(xb)
        loss, _ = cross_entropy_label_smoothing(logits, yb, eps)
        total_loss += loss * len(yb)
        correct += int(np.sum(logits.argmax(axis=1) == yb))
    return total_loss / n, correct / n


def train(net, train_set, test_set, config, metrics_path=None):
    """Train ``net`` in place and return the per-epoch metric rows."""
    rng = Rng(config.seed)
    params = net.named_parameters()
    opt = SGD(params, config.momentum, config.weight_decay)
    x_all, y_all = train_set.images, train_set.labels
    n = len(y_all)
    steps_per_epoch = math.ceil(n / config.batch_size)
    rows = []
    step = 0
    for epoch in range(config.epochs):
        net.train()
        order = rng.permutation(n)
        seen, loss_sum, correct = 0, 0.0, 0
        lr = lr_at(step, steps_per_epoch, config)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            xb, yb = x_all[idx], y_all[idx]
            lr = lr_at(step, steps_per_epoch, config)
            logits = net.forward(xb)
            loss, grad = cross_entropy_label_smoothing(logits, yb, config.label_smoothing)
            if not math.isfinite(loss):
                raise _diverged(net, loss)
            net.backward(grad)
            opt.step(net.named_grads(), lr)
            loss_sum += loss * len(idx)
            correct += int(np.sum(logits.argmax(axis=1) == yb))
            seen += len(idx)
            step += 1
        test_loss, test_acc = evaluate(net, test_set.images, test_set.labels) if test_set is not None else (float("nan"), float("nan"))
        row = {
            "epoch": epoch + 1, "lr": lr, "train_loss": loss_sum / seen, "train_acc": correct / seen,
            "test_loss": test_loss, "test_acc": test_acc,
        }
        rows.append(row)
        log.info("epoch %d lr %.4g train_loss %.4f train_acc %.3f test_acc %.3f",
                 row["epoch"], lr, row["train_loss"], row["train_acc"], test_acc)
    if metrics_path is not None:
        write_metrics(rows, metrics_path)
    return rows


METRIC_FIELDS = ("epoch", "lr", "train_loss", "train_acc", "test_loss", "test_acc")


def write_metrics(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRIC_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


__all__ = [
    "ModelConfig", "SGD", "TrainConfig", "TrainingDiverged", "asdict", "build_classifier",
    "cross_entropy_label_smoothing", "evaluate", "lr_at", "sgd_step", "train", "write_metrics",
]
